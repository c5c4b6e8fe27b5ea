#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedsim/harness.hpp"

namespace fedsim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;  // keeps config echo order stable

void append_rates(KvDoc& doc, const Report& report) {
    if (report.fp_rate) {
        doc.set_double("result.fp_rate.mean", report.fp_rate->mean);
        doc.set_double("result.fp_rate.stddev", report.fp_rate->stddev);
    }
    if (report.fn_rate) {
        doc.set_double("result.fn_rate.mean", report.fn_rate->mean);
        doc.set_double("result.fn_rate.stddev", report.fn_rate->stddev);
    }
    for (std::size_t rep = 0; rep < report.fp_per_rep.size(); ++rep) {
        const std::string prefix = "result.rep" + std::to_string(rep);
        if (report.fp_per_rep[rep]) doc.set_double(prefix + ".fp", *report.fp_per_rep[rep]);
        if (report.fn_per_rep[rep]) doc.set_double(prefix + ".fn", *report.fn_per_rep[rep]);
    }
}

std::string csv_header() { return "round,poisoned,decision,reject_votes,main_acc,backdoor_acc"; }

std::string csv_row(const RoundRecord& rec) {
    std::ostringstream out;
    out << rec.round << ',' << (rec.was_poisoned ? 1 : 0) << ',' << to_string(rec.decision) << ','
        << rec.reject_votes() << ',' << format_double(rec.main_accuracy) << ','
        << format_double(rec.backdoor_accuracy);
    return out.str();
}

json record_to_json(const RoundRecord& rec) {
    return json{{"round", rec.round},
                {"poisoned", rec.was_poisoned},
                {"decision", to_string(rec.decision)},
                {"votes", rec.votes},
                {"main_acc", rec.main_accuracy},
                {"backdoor_acc", rec.backdoor_accuracy}};
}

RoundRecord record_from_json(const json& j) {
    RoundRecord rec;
    rec.round = j.at("round").get<int>();
    rec.was_poisoned = j.at("poisoned").get<bool>();
    rec.decision = decision_from_string(j.at("decision").get<std::string>());
    rec.votes = j.at("votes").get<std::vector<int>>();
    rec.main_accuracy = j.at("main_acc").get<double>();
    rec.backdoor_accuracy = j.at("backdoor_acc").get<double>();
    return rec;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << content;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace

EmittedFiles emit_report(const Report& report, ReportFormat format, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InputError("cannot create output directory " + out_dir + ": " + ec.message());

    const std::string tag = config_hash(report.config_echo);
    EmittedFiles files;

    if (format == ReportFormat::Json) {
        json j;
        j["config"] = json::object();
        for (const auto& [key, value] : report.config_echo.entries()) j["config"][key] = value;
        if (report.fp_rate)
            j["fp_rate"] = {{"mean", report.fp_rate->mean}, {"stddev", report.fp_rate->stddev}};
        if (report.fn_rate)
            j["fn_rate"] = {{"mean", report.fn_rate->mean}, {"stddev", report.fn_rate->stddev}};
        j["runs"] = json::array();
        for (const auto& run : report.runs) {
            json rows = json::array();
            for (const RoundRecord& rec : run) rows.push_back(record_to_json(rec));
            j["runs"].push_back(std::move(rows));
        }
        files.summary = (fs::path(out_dir) / ("run_" + tag + "_report.json")).string();
        write_file(files.summary, j.dump(2) + "\n");
        return files;
    }

    KvDoc summary;
    for (const auto& [key, value] : report.config_echo.entries())
        summary.set("config." + key, value);
    append_rates(summary, report);
    files.summary = (fs::path(out_dir) / ("run_" + tag + "_summary.kv")).string();
    summary.save(files.summary);

    for (std::size_t rep = 0; rep < report.runs.size(); ++rep) {
        std::string table = csv_header() + "\n";
        for (const RoundRecord& rec : report.runs[rep]) table += csv_row(rec) + "\n";
        const std::string path =
            (fs::path(out_dir) / ("run_" + tag + "_rounds_rep" + std::to_string(rep) + ".csv"))
                .string();
        write_file(path, table);
        files.round_tables.push_back(path);
    }
    return files;
}

std::string emit_sweep_summary(const std::vector<Report>& reports, const std::string& out_dir) {
    if (reports.empty()) throw InputError("emit_sweep_summary: no reports");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InputError("cannot create output directory " + out_dir + ": " + ec.message());

    KvDoc doc;
    doc.set_int("sweep.points", static_cast<long long>(reports.size()));
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string prefix = "grid." + std::to_string(i);
        const KvDoc& cfg = reports[i].config_echo;
        doc.set(prefix + ".lookback", cfg.get_string("defense.lookback", "?"));
        doc.set(prefix + ".quorum", cfg.get_string("defense.quorum", "?"));
        doc.set(prefix + ".client_share", cfg.get_string("split.client_share", "?"));
        if (reports[i].fp_rate) {
            doc.set_double(prefix + ".fp_mean", reports[i].fp_rate->mean);
            doc.set_double(prefix + ".fp_stddev", reports[i].fp_rate->stddev);
        }
        if (reports[i].fn_rate) {
            doc.set_double(prefix + ".fn_mean", reports[i].fn_rate->mean);
            doc.set_double(prefix + ".fn_stddev", reports[i].fn_rate->stddev);
        }
    }
    // tag by the base (first) config so reruns land on the same file
    const std::string path =
        (fs::path(out_dir) / ("sweep_" + config_hash(reports.front().config_echo) + "_summary.kv"))
            .string();
    doc.save(path);
    return path;
}

std::vector<RoundRecord> parse_round_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty round table: " + path);
    if (line != csv_header()) throw InputError("unexpected header in " + path);

    std::vector<RoundRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        RoundRecord rec;
        std::getline(row, field, ',');
        rec.round = std::stoi(field);
        std::getline(row, field, ',');
        rec.was_poisoned = field == "1";
        std::getline(row, field, ',');
        rec.decision = decision_from_string(field);
        std::getline(row, field, ',');
        const int rejects = std::stoi(field);
        rec.votes.assign(rejects, 1);  // tally only; per-validator detail lives in json
        std::getline(row, field, ',');
        rec.main_accuracy = std::stod(field);
        std::getline(row, field, ',');
        rec.backdoor_accuracy = std::stod(field);
        records.push_back(std::move(rec));
    }
    return records;
}

Report parse_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    json j;
    in >> j;

    Report report;
    for (const auto& [key, value] : j.at("config").items())
        report.config_echo.set(key, value.get<std::string>());
    if (j.contains("fp_rate"))
        report.fp_rate = RateStat{j["fp_rate"]["mean"].get<double>(),
                                  j["fp_rate"]["stddev"].get<double>()};
    if (j.contains("fn_rate"))
        report.fn_rate = RateStat{j["fn_rate"]["mean"].get<double>(),
                                  j["fn_rate"]["stddev"].get<double>()};
    for (const auto& run : j.at("runs")) {
        std::vector<RoundRecord> records;
        for (const auto& row : run) records.push_back(record_from_json(row));
        report.runs.push_back(std::move(records));
    }
    return report;
}

}  // namespace fedsim
