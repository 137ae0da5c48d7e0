#include "lordd/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lordd/error.hpp"
#include "lordd/eval/metrics.hpp"

namespace lordd::eval {

namespace {

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

double pick(const Scores& s, Metric m) { return m == Metric::similarity ? s.similarity : s.accuracy; }

Scores rel(const Scores& value, const Scores& reference) {
    return {relative_difference(value.similarity, reference.similarity),
            relative_difference(value.accuracy, reference.accuracy)};
}

nlohmann::ordered_json scores_json(const Scores& s) {
    nlohmann::ordered_json j;
    j["similarity"] = s.similarity;
    j["accuracy"] = s.accuracy;
    return j;
}

Scores scores_from_json(const nlohmann::json& j) {
    return {j.at("similarity").get<double>(), j.at("accuracy").get<double>()};
}

Metric parse_metric(const std::string& s) {
    if (s == "similarity") return Metric::similarity;
    if (s == "accuracy") return Metric::accuracy;
    throw ParseError("unknown metric '" + s + "'");
}

AnnotationKind parse_kind(const std::string& s) {
    if (s == "improve") return AnnotationKind::improve;
    if (s == "degrade") return AnnotationKind::degrade;
    throw ParseError("unknown annotation kind '" + s + "'");
}

}  // namespace

std::string RowKey::str() const {
    std::string s = method + " | " + training_data;
    if (!corpus.empty()) s += " | " + corpus;
    if (!variant.empty()) s += " | " + variant;
    return s + " | test " + test_dialect;
}

std::string to_string(Metric m) { return m == Metric::similarity ? "similarity" : "accuracy"; }
std::string to_string(AnnotationKind k) { return k == AnnotationKind::improve ? "improve" : "degrade"; }

const ReportRow& EvalReport::row(const RowKey& key) const {
    for (const auto& r : rows) {
        if (r.key == key) return r;
    }
    throw ArgumentError("report has no row " + key.str());
}

std::size_t EvalReport::unreconciled() const {
    return static_cast<std::size_t>(
        std::count_if(reconciliations.begin(), reconciliations.end(), [](const auto& r) { return !r.reconciled; }));
}

EvalReport build_report(std::span<const ResultSet> sets, const ReportSpec& spec) {
    EvalReport rep;
    rep.tolerance = spec.tolerance;
    for (const auto& s : sets) {
        if (s.backend_id.empty()) throw ArgumentError("result set for " + s.key.str() + " has no backend id");
        if (std::find(rep.backends.begin(), rep.backends.end(), s.backend_id) == rep.backends.end()) {
            rep.backends.push_back(s.backend_id);
        }
        auto it = std::find_if(rep.rows.begin(), rep.rows.end(), [&](const auto& r) { return r.key == s.key; });
        if (it == rep.rows.end()) {
            rep.rows.push_back({s.key, {}, {}, std::nullopt, std::nullopt, {}});
            it = std::prev(rep.rows.end());
        }
        if (!it->per_backend.emplace(s.backend_id, s.scores).second) {
            throw ArgumentError("duplicate result for " + s.key.str() + " on backend " + s.backend_id);
        }
        if (!s.manifest.empty()) it->manifests.push_back(s.manifest);
    }
    for (auto& r : rep.rows) {
        for (const auto& [b, sc] : r.per_backend) {
            r.mu.similarity += sc.similarity;
            r.mu.accuracy += sc.accuracy;
        }
        const auto n = static_cast<double>(r.per_backend.size());
        r.mu.similarity /= n;
        r.mu.accuracy /= n;
    }

    const ReportRow* skyline = spec.skyline ? &rep.row(*spec.skyline) : nullptr;
    std::map<std::string, const ReportRow*> baseline;
    for (const auto& k : spec.in_dialect) {
        if (!baseline.emplace(k.test_dialect, &rep.row(k)).second) {
            throw ArgumentError("two in-dialect rows for test dialect " + k.test_dialect);
        }
    }
    for (auto& r : rep.rows) {
        if (skyline && r.key == skyline->key) {
            r.degrade = Scores{0.0, 0.0};
            // The skyline's improvement column reads against the first in-dialect baseline.
            if (!spec.in_dialect.empty()) r.improve = rel(r.mu, rep.row(spec.in_dialect.front()).mu);
            continue;
        }
        if (skyline) r.degrade = rel(skyline->mu, r.mu);
        if (auto b = baseline.find(r.key.test_dialect); b != baseline.end()) r.improve = rel(r.mu, b->second->mu);
    }

    for (const auto& p : spec.published) {
        const ReportRow& r = rep.row(p.key);
        const auto& ann = p.kind == AnnotationKind::improve ? r.improve : r.degrade;
        if (!ann) {
            throw ArgumentError("row " + p.key.str() + " carries no " + to_string(p.kind) + " annotation");
        }
        Reconciliation rc{p, pick(*ann, p.metric), false};
        rc.reconciled = std::abs(rc.computed - p.value) <= spec.tolerance;
        rep.reconciliations.push_back(rc);
    }
    return rep;
}

nlohmann::json to_json(const RowKey& key) {
    nlohmann::ordered_json j;
    j["method"] = key.method;
    j["training_data"] = key.training_data;
    j["corpus"] = key.corpus;
    j["variant"] = key.variant;
    j["test_dialect"] = key.test_dialect;
    return j;
}

RowKey row_key_from_json(const nlohmann::json& j) {
    RowKey k;
    k.method = j.at("method").get<std::string>();
    k.training_data = j.value("training_data", "");
    k.corpus = j.value("corpus", "");
    k.variant = j.value("variant", "");
    k.test_dialect = j.at("test_dialect").get<std::string>();
    return k;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["format"] = "lordd-report/1";
    j["backends"] = report.backends;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["key"] = to_json(r.key);
        nlohmann::ordered_json pb;
        for (const auto& b : report.backends) {
            if (auto it = r.per_backend.find(b); it != r.per_backend.end()) pb[b] = scores_json(it->second);
        }
        row["per_backend"] = pb;
        row["mu"] = scores_json(r.mu);
        row["improve"] = r.improve ? nlohmann::ordered_json(scores_json(*r.improve)) : nlohmann::ordered_json();
        row["degrade"] = r.degrade ? nlohmann::ordered_json(scores_json(*r.degrade)) : nlohmann::ordered_json();
        row["manifests"] = r.manifests;
        j["rows"].push_back(row);
    }
    j["tolerance"] = report.tolerance;
    j["status"] = report.unreconciled() ? "UNRECONCILED" : "ok";
    j["unreconciled"] = report.unreconciled();
    j["reconciliations"] = nlohmann::ordered_json::array();
    for (const auto& rc : report.reconciliations) {
        nlohmann::ordered_json x;
        x["key"] = to_json(rc.published.key);
        x["kind"] = to_string(rc.published.kind);
        x["metric"] = to_string(rc.published.metric);
        x["published"] = rc.published.value;
        x["computed"] = rc.computed;
        x["status"] = rc.reconciled ? "ok" : "UNRECONCILED";
        j["reconciliations"].push_back(x);
    }
    return j;
}

std::string render_table(const EvalReport& report) {
    const bool any_corpus = std::any_of(report.rows.begin(), report.rows.end(), [](const auto& r) { return !r.key.corpus.empty(); });
    const bool any_variant = std::any_of(report.rows.begin(), report.rows.end(), [](const auto& r) { return !r.key.variant.empty(); });

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head{"Method", "Training data"};
    if (any_corpus) head.push_back("Corpus");
    if (any_variant) head.push_back("Variant");
    head.push_back("Test");
    for (const auto& b : report.backends) {
        head.push_back(b + " Sim");
        head.push_back(b + " Acc");
    }
    head.push_back("mu Sim");
    head.push_back("mu Acc");
    cells.push_back(head);

    auto annotate = [](const ReportRow& r, Metric m) {
        std::string s;
        if (r.degrade) s += "<" + fmt1(pick(*r.degrade, m)) + "> ";
        s += fmt1(pick(r.mu, m));
        if (r.improve) s += " (" + fmt1(pick(*r.improve, m)) + ")";
        return s;
    };
    for (const auto& r : report.rows) {
        std::vector<std::string> line{r.key.method, r.key.training_data};
        if (any_corpus) line.push_back(r.key.corpus.empty() ? "-" : r.key.corpus);
        if (any_variant) line.push_back(r.key.variant.empty() ? "-" : r.key.variant);
        line.push_back(r.key.test_dialect);
        for (const auto& b : report.backends) {
            auto it = r.per_backend.find(b);
            line.push_back(it == r.per_backend.end() ? "-" : fmt1(it->second.similarity));
            line.push_back(it == r.per_backend.end() ? "-" : fmt1(it->second.accuracy));
        }
        line.push_back(annotate(r, Metric::similarity));
        line.push_back(annotate(r, Metric::accuracy));
        cells.push_back(line);
    }

    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < cells[i].size(); ++c) {
            if (c) out << "  ";
            const std::string& v = cells[i][c];
            // Text columns left, numbers right.
            const bool left = c + 2 + 2 * report.backends.size() < head.size();
            if (left) out << v << std::string(width[c] - v.size(), ' ');
            else out << std::string(width[c] - v.size(), ' ') << v;
        }
        out << '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
        }
    }
    out << "mu cells: <degradation vs skyline> mean (improvement vs in-dialect), percent\n";
    if (!report.reconciliations.empty()) {
        out << "\nPublished annotations (tolerance " << fmt1(report.tolerance) << "):\n";
        for (const auto& rc : report.reconciliations) {
            out << "  " << (rc.reconciled ? "ok          " : "UNRECONCILED") << "  " << to_string(rc.published.kind)
                << ' ' << to_string(rc.published.metric) << "  published " << fmt1(rc.published.value) << "  computed "
                << fmt1(rc.computed) << "  " << rc.published.key.str() << '\n';
        }
    }
    return out.str();
}

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + (dir / "report.json").string());
        out << to_json(report).dump(2) << '\n';
    }
    std::ofstream out(dir / "report.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "report.txt").string());
    out << render_table(report);
}

std::vector<ResultSet> result_sets_from_json(const nlohmann::json& j) {
    std::vector<ResultSet> out;
    try {
        for (const auto& e : j.at("results")) {
            const RowKey key = row_key_from_json(e.at("key"));
            const std::string manifest = e.value("manifest", "");
            if (e.contains("scores")) {
                // An array, so backend order survives parsing.
                for (const auto& s : e.at("scores")) {
                    out.push_back({key, s.at("backend").get<std::string>(), scores_from_json(s), manifest});
                }
            } else {
                out.push_back({key, e.at("backend").get<std::string>(), scores_from_json(e), manifest});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("result sets: ") + e.what());
    }
    return out;
}

ReportSpec report_spec_from_json(const nlohmann::json& j) {
    ReportSpec spec;
    try {
        if (j.contains("skyline") && !j["skyline"].is_null()) spec.skyline = row_key_from_json(j["skyline"]);
        for (const auto& k : j.value("in_dialect", nlohmann::json::array())) spec.in_dialect.push_back(row_key_from_json(k));
        for (const auto& p : j.value("published", nlohmann::json::array())) {
            spec.published.push_back({row_key_from_json(p.at("key")), parse_kind(p.at("kind").get<std::string>()),
                                      parse_metric(p.at("metric").get<std::string>()), p.at("value").get<double>()});
        }
        spec.tolerance = j.value("tolerance", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report spec: ") + e.what());
    }
    return spec;
}

}  // namespace lordd::eval
