#include "emcc/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "emcc/error.hpp"
#include "emcc/pipeline.hpp"
#include "emcc/transform_debug.hpp"

namespace emcc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class RateTable {
public:
    RateTable(std::span<const double> genuine, std::span<const double> imposter)
        : gen_(genuine.begin(), genuine.end()), imp_(imposter.begin(), imposter.end()) {
        if (gen_.empty() || imp_.empty()) throw EmptyScores("genuine and imposter score sets must be non-empty");
        std::sort(gen_.begin(), gen_.end());
        std::sort(imp_.begin(), imp_.end());
    }

    // #{imposter >= t}
    std::size_t false_matches(double t) const {
        return imp_.size() - static_cast<std::size_t>(std::lower_bound(imp_.begin(), imp_.end(), t) - imp_.begin());
    }
    // #{genuine < t}
    std::size_t false_non_matches(double t) const {
        return static_cast<std::size_t>(std::lower_bound(gen_.begin(), gen_.end(), t) - gen_.begin());
    }

    std::vector<double> candidate_thresholds() const {
        std::vector<double> t;
        t.reserve(gen_.size() + imp_.size() + 1);
        std::merge(gen_.begin(), gen_.end(), imp_.begin(), imp_.end(), std::back_inserter(t));
        t.erase(std::unique(t.begin(), t.end()), t.end());
        t.push_back(kInf);
        return t;
    }

    double lowest() const { return std::min(gen_.front(), imp_.front()); }
    double highest() const { return std::max(gen_.back(), imp_.back()); }
    double n_gen() const { return double(gen_.size()); }
    double n_imp() const { return double(imp_.size()); }
    std::size_t imposters() const { return imp_.size(); }
    std::size_t genuines() const { return gen_.size(); }

private:
    std::vector<double> gen_;
    std::vector<double> imp_;
};

bool all_numeric(const std::vector<std::string>& ids) {
    return std::all_of(ids.begin(), ids.end(), [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    });
}

// Sort key that orders numeric ids by value ("2" < "10") and the rest lexically.
std::vector<std::string> ordered_ids(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (all_numeric(ids)) {
        std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
            return a.size() != b.size() ? a.size() < b.size() : a < b;
        });
    }
    return ids;
}

std::string label(const MinutiaeRecord& r) { return r.finger_id + "_" + r.impression_id; }

std::string num(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t code_of(const BitVector& bits, std::size_t unit) {
    return (bits.get(2 * unit) ? 2u : 0u) + (bits.get(2 * unit + 1) ? 1u : 0u);
}

}  // namespace

double compute_eer(std::span<const double> genuine, std::span<const double> imposter) {
    const RateTable rt(genuine, imposter);
    const auto ng = static_cast<long long>(rt.genuines());
    const auto ni = static_cast<long long>(rt.imposters());
    double prev_fmr = 1.0, prev_fnmr = 0.0;
    for (double t : rt.candidate_thresholds()) {
        const auto fm = static_cast<long long>(rt.false_matches(t));
        const auto fnm = static_cast<long long>(rt.false_non_matches(t));
        const double fmr = double(fm) / double(ni);
        const double fnmr = double(fnm) / double(ng);
        const long long sign = fm * ng - fnm * ni;
        if (sign == 0) return 100.0 * fmr;
        if (sign < 0) {
            const double da = prev_fmr - prev_fnmr;
            const double db = fmr - fnmr;
            const double lambda = da / (da - db);
            return 100.0 * (prev_fmr + lambda * (fmr - prev_fmr));
        }
        prev_fmr = fmr;
        prev_fnmr = fnmr;
    }
    return 100.0 * prev_fmr;  // unreachable: +inf always gives FMR 0 < FNMR 1
}

double compute_fmr1000(std::span<const double> genuine, std::span<const double> imposter) {
    const RateTable rt(genuine, imposter);
    for (double t : rt.candidate_thresholds()) {
        if (1000 * rt.false_matches(t) <= rt.imposters()) return 100.0 * double(rt.false_non_matches(t)) / rt.n_gen();
    }
    return 100.0;
}

std::vector<DetPoint> det_curve(std::span<const double> genuine, std::span<const double> imposter, std::size_t grid) {
    const RateTable rt(genuine, imposter);
    std::vector<double> thresholds;
    if (grid == 0) {
        thresholds = rt.candidate_thresholds();
    } else {
        if (grid < 2) throw ParamError("DET grid needs at least two thresholds");
        const double lo = rt.lowest();
        const double hi = std::nextafter(rt.highest(), kInf);
        for (std::size_t j = 0; j + 1 < grid; ++j) thresholds.push_back(lo + (hi - lo) * double(j) / double(grid - 1));
        thresholds.push_back(hi);
    }
    std::vector<DetPoint> pts;
    pts.reserve(thresholds.size());
    for (double t : thresholds) {
        pts.push_back({t, double(rt.false_matches(t)) / rt.n_imp(), double(rt.false_non_matches(t)) / rt.n_gen()});
    }
    std::stable_sort(pts.begin(), pts.end(), [](const DetPoint& a, const DetPoint& b) {
        return a.fmr != b.fmr ? a.fmr < b.fmr : a.fnmr > b.fnmr;
    });
    return pts;
}

Dataset make_dataset(std::vector<MinutiaeRecord> records) {
    std::vector<std::string> fingers, impressions;
    for (const auto& r : records) {
        fingers.push_back(r.finger_id);
        impressions.push_back(r.impression_id);
    }
    fingers = ordered_ids(std::move(fingers));
    impressions = ordered_ids(std::move(impressions));

    Dataset ds;
    ds.fingers = fingers.size();
    ds.impressions = impressions.size();
    if (ds.fingers == 0) throw DatasetShapeError("dataset contains no records");
    if (records.size() != ds.fingers * ds.impressions) {
        throw DatasetShapeError("dataset has " + std::to_string(records.size()) + " records; expected " +
                                std::to_string(ds.fingers) + " fingers x " + std::to_string(ds.impressions) +
                                " impressions");
    }
    std::map<std::string, std::size_t> fpos, ipos;
    for (std::size_t i = 0; i < fingers.size(); ++i) fpos[fingers[i]] = i;
    for (std::size_t i = 0; i < impressions.size(); ++i) ipos[impressions[i]] = i;
    ds.records.resize(records.size());
    std::vector<bool> seen(records.size());
    for (auto& r : records) {
        const std::size_t slot = fpos[r.finger_id] * ds.impressions + ipos[r.impression_id];
        if (seen[slot]) throw DatasetShapeError("duplicate record " + label(r));
        seen[slot] = true;
        ds.records[slot] = std::move(r);
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& dir, MinutiaeFormat format) {
    if (!std::filesystem::is_directory(dir)) throw DatasetShapeError("dataset directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".min") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<MinutiaeRecord> records;
    records.reserve(files.size());
    for (const auto& f : files) records.push_back(parse_minutiae_file(f, format).record);
    return make_dataset(std::move(records));
}

std::vector<double> EvalReport::genuine_scores() const {
    std::vector<double> s;
    for (const auto& c : genuine) s.push_back(c.score);
    return s;
}

std::vector<double> EvalReport::imposter_scores() const {
    std::vector<double> s;
    for (const auto& c : imposter) s.push_back(c.score);
    return s;
}

std::vector<std::size_t> score_histogram(std::span<const double> scores) {
    std::vector<std::size_t> h(20, 0);
    for (double s : scores) {
        const auto bin = static_cast<std::ptrdiff_t>(std::floor(s / 0.05));
        h[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(bin, 0, 19))]++;
    }
    return h;
}

EvalReport run_fvc_protocol(const Dataset& ds, const EvalSettings& settings) {
    settings.mcc.validate();
    settings.greedy.validate();
    const IndexSet idx = derive_index_set(settings.key, settings.mcc.cell_count());

    EvalReport rep;
    rep.settings = settings;
    rep.fingers = ds.fingers;
    rep.impressions = ds.impressions;
    const auto n = static_cast<std::ptrdiff_t>(ds.records.size());

    std::vector<std::vector<CylinderFeature>> cylinders(ds.records.size());
    auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        cylinders[u] = serial::build_cylinders(ds.records[u], settings.mcc);
    }
    rep.timing.build_ms = ms_since(t0) / double(std::max<std::ptrdiff_t>(n, 1));

    std::vector<CancelableTemplate> templates(ds.records.size());
    t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        auto& t = templates[u];
        t.features = transform_features(cylinders[u], idx, settings.key);
        t.header = make_header(settings.key, settings.mcc.cell_count(), t.features.size());
    }
    rep.timing.transform_ms = ms_since(t0) / double(std::max<std::ptrdiff_t>(n, 1));
    for (const auto& t : templates) rep.empty_templates += t.features.empty();

    struct Job {
        std::size_t q, e;
        bool genuine;
    };
    std::vector<Job> jobs;
    const std::size_t F = ds.fingers, I = ds.impressions;
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t a = 0; a < I; ++a) {
            for (std::size_t b = a + 1; b < I; ++b) jobs.push_back({f * I + a, f * I + b, true});
        }
    }
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t g = f + 1; g < F; ++g) jobs.push_back({f * I, g * I, false});
    }

    std::vector<double> scores(jobs.size(), 0.0);
    t0 = std::chrono::steady_clock::now();
    const auto nj = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t j = 0; j < nj; ++j) {
        const auto& job = jobs[static_cast<std::size_t>(j)];
        const auto& q = templates[job.q];
        const auto& e = templates[job.e];
        if (q.features.empty() || e.features.empty()) continue;
        scores[static_cast<std::size_t>(j)] =
            greedy_decision_score(similarity_matrix(q.features, e.features), settings.greedy).score;
    }
    rep.timing.match_ms = ms_since(t0) / double(std::max<std::ptrdiff_t>(nj, 1));

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        Comparison c{label(ds.records[jobs[j].q]), label(ds.records[jobs[j].e]), scores[j]};
        (jobs[j].genuine ? rep.genuine : rep.imposter).push_back(std::move(c));
    }

    const auto gs = rep.genuine_scores();
    const auto is = rep.imposter_scores();
    rep.genuine_histogram = score_histogram(gs);
    rep.imposter_histogram = score_histogram(is);
    if (!gs.empty() && !is.empty()) {
        rep.eer = compute_eer(gs, is);
        rep.fmr1000 = compute_fmr1000(gs, is);
        rep.det_points = det_curve(gs, is, 0);
    }
    return rep;
}

EvalReport run_fvc_protocol(const std::filesystem::path& dir, const EvalSettings& settings) {
    return run_fvc_protocol(load_dataset(dir), settings);
}

void write_report_files(const EvalReport& r, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto open = [&](const char* name) {
        std::ofstream f(out_dir / name, std::ios::trunc);
        if (!f) throw IoError("cannot write " + (out_dir / name).string());
        return f;
    };
    auto write_scores = [&](const char* name, const std::vector<Comparison>& cs) {
        auto f = open(name);
        f << "query,enrolled,score\n";
        for (const auto& c : cs) f << c.query << ',' << c.enrolled << ',' << num(c.score) << '\n';
    };
    write_scores("scores_genuine.csv", r.genuine);
    write_scores("scores_imposter.csv", r.imposter);
    {
        auto f = open("det.csv");
        f << "fmr,fnmr,threshold\n";
        for (const auto& p : r.det_points) {
            f << num(p.fmr) << ',' << num(p.fnmr) << ',' << (std::isinf(p.threshold) ? "inf" : num(p.threshold))
              << '\n';
        }
    }
    {
        auto f = open("histogram.csv");
        f << "bin_low,bin_high,genuine,imposter\n";
        for (std::size_t b = 0; b < r.genuine_histogram.size(); ++b) {
            f << num(double(b) / 20.0) << ',' << num(double(b + 1) / 20.0) << ',' << r.genuine_histogram[b] << ','
              << r.imposter_histogram[b] << '\n';
        }
    }
    const auto& s = r.settings;
    nlohmann::ordered_json j;
    j["fingers"] = r.fingers;
    j["impressions"] = r.impressions;
    j["genuine_count"] = r.genuine.size();
    j["imposter_count"] = r.imposter.size();
    j["eer_percent"] = r.eer;
    j["fmr1000_percent"] = r.fmr1000;
    j["empty_templates"] = r.empty_templates;
    j["timing_ms"] = {{"build_per_record", r.timing.build_ms},
                      {"transform_per_record", r.timing.transform_ms},
                      {"match_per_comparison", r.timing.match_ms}};
    j["config"]["transform"] = {{"p", std::to_string(s.key.p_num) + "/" + std::to_string(s.key.p_den)},
                                {"tau", s.key.tau()},
                                {"depth", s.key.depth},
                                {"seed_id", s.key.seed_id()},
                                {"units_per_feature", s.key.unit_count(s.mcc.cell_count())}};
    j["config"]["mcc"] = {{"n_s", s.mcc.n_s},
                          {"n_d", s.mcc.n_d},
                          {"radius", s.mcc.radius},
                          {"sigma_s", s.mcc.sigma_s},
                          {"sigma_d", s.mcc.sigma_d},
                          {"min_contributing_minutiae", s.mcc.min_contributing_minutiae},
                          {"psi_mu", s.mcc.psi_mu},
                          {"psi_tau", s.mcc.psi_tau}};
    j["config"]["greedy"] = {{"min_pairs", s.greedy.min_pairs},
                             {"max_pairs", s.greedy.max_pairs},
                             {"mu_p", s.greedy.mu_p},
                             {"tau_p", s.greedy.tau_p}};
    auto f = open("report.json");
    f << j.dump(2) << '\n';
}

std::array<double, 4> CodeStats::frequencies(const CodeCounts& c) {
    const double total = double(c[0] + c[1] + c[2] + c[3]);
    std::array<double, 4> f{};
    if (total == 0) return f;
    for (std::size_t i = 0; i < 4; ++i) f[i] = double(c[i]) / total;
    return f;
}

CodeStats code_distribution_stats(std::span<const CylinderFeature> features, const TransformKey& key) {
    CodeStats st;
    st.half_difference_histogram.assign(40, 0);
    if (features.empty()) return st;
    const IndexSet idx = derive_index_set(key, features.front().cell_values.size());
    for (const auto& f : features) {
        if (!f.valid) continue;
        const auto s = debug::pipeline_stages(f, idx, key);
        ++st.features;
        for (std::size_t u = 0; u < s.e_bar.size() / 2; ++u) st.e_bar[code_of(s.e_bar, u)]++;
        for (std::size_t u = 0; u < s.e_hat.size() / 2; ++u) st.e_hat[code_of(s.e_hat, u)]++;
        for (double e : s.e) {
            const auto bin = static_cast<std::ptrdiff_t>(std::floor((e / 2.0 + 1.0) / 0.05));
            st.half_difference_histogram[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(bin, 0, 39))]++;
        }
    }
    return st;
}

CodeCounts template_unit_counts(std::span<const CancelableTemplate> templates) {
    CodeCounts c{};
    for (const auto& t : templates) {
        for (const auto& f : t.features) {
            for (std::size_t u = 0; u < f.e_hat.size() / 2; ++u) c[code_of(f.e_hat, u)]++;
        }
    }
    return c;
}

double log10_product_of_powers(std::span<const double> probabilities, std::span<const double> exponents) {
    if (probabilities.size() != exponents.size()) throw LengthError("probabilities and exponents differ in length");
    double acc = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (!(probabilities[i] > 0.0)) throw ParamError("probabilities must be positive");
        acc += exponents[i] * std::log10(probabilities[i]);
    }
    return acc;
}

}  // namespace emcc
