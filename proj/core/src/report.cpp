#include "sgv/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sgv/netpbm.hpp"

namespace sgv {

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw io_error(path.string() + ": cannot open for writing");
    return out;
}

}  // namespace

std::vector<report_row> per_sequence_table(const std::vector<sequence_result>& results) {
    std::vector<report_row> rows;
    for (const auto& seq : results)
        rows.push_back({seq.sequence_id, summarize(seq.per_frame_j), summarize(seq.per_frame_f)});

    if (!rows.empty()) {
        report_row agg;
        agg.sequence_id = "aggregate";
        for (const auto& r : rows) {
            agg.j.mean += r.j.mean;
            agg.j.recall += r.j.recall;
            agg.j.decay += r.j.decay;
            agg.f.mean += r.f.mean;
            agg.f.recall += r.f.recall;
            agg.f.decay += r.f.decay;
        }
        const double n = static_cast<double>(rows.size());
        agg.j.mean /= n;
        agg.j.recall /= n;
        agg.j.decay /= n;
        agg.f.mean /= n;
        agg.f.recall /= n;
        agg.f.decay /= n;
        rows.push_back(agg);
    }
    return rows;
}

void write_per_sequence_csv(const std::vector<sequence_result>& results,
                            const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sequence_id,J-M,J-O,J-D,F-M,F-O,F-D\n";
    for (const auto& row : per_sequence_table(results)) {
        out << row.sequence_id << ',' << fmt4(row.j.mean) << ',' << fmt4(row.j.recall) << ','
            << fmt4(row.j.decay) << ',' << fmt4(row.f.mean) << ',' << fmt4(row.f.recall) << ','
            << fmt4(row.f.decay) << '\n';
    }
}

void write_per_sequence_json(const std::vector<sequence_result>& results,
                             const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["sequences"] = nlohmann::json::array();
    for (const auto& seq : results) {
        const auto j = summarize(seq.per_frame_j);
        const auto f = summarize(seq.per_frame_f);
        nlohmann::json entry;
        entry["sequence_id"] = seq.sequence_id;
        entry["per_frame_j"] = seq.per_frame_j;
        entry["per_frame_f"] = seq.per_frame_f;
        entry["attributes"] = seq.attributes;
        entry["j"] = {{"mean", j.mean}, {"recall", j.recall}, {"decay", j.decay}};
        entry["f"] = {{"mean", f.mean}, {"recall", f.recall}, {"decay", f.decay}};
        doc["sequences"].push_back(entry);
    }
    const auto rows = per_sequence_table(results);
    if (!rows.empty()) {
        const auto& agg = rows.back();
        doc["aggregate"] = {
            {"j", {{"mean", agg.j.mean}, {"recall", agg.j.recall}, {"decay", agg.j.decay}}},
            {"f", {{"mean", agg.f.mean}, {"recall", agg.f.recall}, {"decay", agg.f.decay}}}};
    }
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
}

void write_decay_csv(const std::array<double, 101>& curve, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (int p = 0; p <= 100; ++p) out << p << ',' << fmt4(curve[p]) << '\n';
}

void write_attribute_csv(const std::vector<attribute_entry>& entries,
                         const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "attribute,mean,gain,with_count,without_count\n";
    for (const auto& e : entries) {
        out << e.code << ',';
        if (e.defined)
            out << fmt4(e.mean_with) << ',' << fmt4(e.gain);
        else
            out << "undefined,undefined";
        out << ',' << e.with_count << ',' << e.without_count << '\n';
    }
}

void write_error_csv(
    const std::vector<std::pair<std::string, error_partition_result>>& partitions,
    const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sequence_id,fp_close_pct,fp_far_pct,fn_pct\n";
    for (const auto& [id, partition] : partitions) {
        out << id << ',' << fmt4(partition.fp_close_pct) << ',' << fmt4(partition.fp_far_pct)
            << ',' << fmt4(partition.fn_pct) << '\n';
    }
}

void emit_report(const std::vector<sequence_result>& results, const std::filesystem::path& dir,
                 const std::string& format) {
    std::filesystem::create_directories(dir);
    if (format == "csv" || format == "both")
        write_per_sequence_csv(results, dir / "per_sequence.csv");
    if (format == "json" || format == "both")
        write_per_sequence_json(results, dir / "per_sequence.json");
    if (format != "csv" && format != "json" && format != "both")
        throw std::invalid_argument("emit_report: unknown format '" + format + "'");
}

}  // namespace sgv
