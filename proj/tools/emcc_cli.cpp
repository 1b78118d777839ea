// emcc: enroll, match, revoke, evaluate and stats over cancelable templates.
//
// Exit codes: 0 success (match: accepted), 1 non-match, 2 any error.

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emcc/config.hpp"
#include "emcc/error.hpp"
#include "emcc/eval.hpp"
#include "emcc/workflow.hpp"

namespace {

struct Common {
    std::optional<std::string> config;
    std::optional<std::string> key_file;
    bool iso = false;
};

emcc::Config load(const Common& c) {
    auto cfg = emcc::resolve_config(c.config ? std::optional<std::filesystem::path>(*c.config) : std::nullopt);
    if (c.key_file) cfg.key_file = *c.key_file;
    return cfg;
}

emcc::KeyRing keys_of(const emcc::Config& cfg) {
    if (!cfg.key_file) throw emcc::ConfigError("no key file: pass --key-file or set key_file in the config");
    return emcc::load_key_file(*cfg.key_file);
}

emcc::MinutiaeRecord read_record(const std::string& path, bool iso) {
    return emcc::parse_minutiae_file(path, iso ? emcc::MinutiaeFormat::IsoLikeBinary : emcc::MinutiaeFormat::PlainText)
        .record;
}

std::string hex_id(std::uint64_t id) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
    return buf;
}

void add_common(CLI::App* sub, Common& c, bool with_format) {
    sub->add_option("-c,--config", c.config, "config file (default: $EMCC_CONFIG)");
    sub->add_option("-k,--key-file", c.key_file, "key file holding seeds");
    if (with_format) sub->add_flag("--iso", c.iso, "minutiae files are ISO-like binary records");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cancelable fingerprint templates"};
    app.require_subcommand(1);
    Common common;

    // enroll
    std::string enroll_in, enroll_out;
    std::optional<std::uint64_t> enroll_seed;
    auto* enroll = app.add_subcommand("enroll", "protect a minutiae file into a template");
    enroll->add_option("minutiae", enroll_in)->required();
    enroll->add_option("-o,--out", enroll_out)->required();
    enroll->add_option("-s,--seed", enroll_seed, "seed (default: first seed of the key file)");
    add_common(enroll, common, true);

    // match
    std::string match_query, match_tmpl;
    auto* match = app.add_subcommand("match", "compare query minutiae against an enrolled template");
    match->add_option("query", match_query)->required();
    match->add_option("template", match_tmpl)->required();
    add_common(match, common, true);

    // revoke
    std::string revoke_old, revoke_src, revoke_out;
    std::uint64_t revoke_seed = 0;
    auto* revoke = app.add_subcommand("revoke", "re-enroll under a new seed");
    revoke->add_option("old_template", revoke_old)->required();
    revoke->add_option("minutiae", revoke_src)->required();
    revoke->add_option("-n,--new-seed", revoke_seed)->required();
    revoke->add_option("-o,--out", revoke_out)->required();
    add_common(revoke, common, true);

    // evaluate
    std::optional<std::string> eval_dir, eval_out;
    std::vector<std::uint64_t> eval_synth;
    std::uint64_t eval_seed = 0;
    auto* evaluate = app.add_subcommand("evaluate", "run the FVC protocol");
    evaluate->add_option("dataset", eval_dir, "directory of <finger>_<impression>.min files");
    evaluate->add_option("--synthetic", eval_synth, "FINGERS IMPRESSIONS SEED")->expected(3);
    evaluate->add_option("-s,--seed", eval_seed, "transform seed");
    evaluate->add_option("-o,--out", eval_out, "directory for report files");
    add_common(evaluate, common, true);

    // stats
    std::optional<std::string> stats_dir;
    std::vector<std::uint64_t> stats_synth;
    std::uint64_t stats_seed = 0;
    auto* stats = app.add_subcommand("stats", "code frequencies and collision probability");
    stats->add_option("dataset", stats_dir);
    stats->add_option("--synthetic", stats_synth, "FINGERS IMPRESSIONS SEED")->expected(3);
    stats->add_option("-s,--seed", stats_seed, "transform seed");
    add_common(stats, common, true);

    // synth
    std::string synth_dir;
    std::vector<std::uint64_t> synth_shape{100, 8, 1};
    auto* synth = app.add_subcommand("synth", "write a synthetic FVC-shaped dataset");
    synth->add_option("dir", synth_dir)->required();
    synth->add_option("--shape", synth_shape, "FINGERS IMPRESSIONS SEED")->expected(3);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        std::cout << std::fixed;
        if (*enroll) {
            const auto cfg = load(common);
            const std::uint64_t seed = enroll_seed ? *enroll_seed : [&] {
                const auto ring = keys_of(cfg);
                if (ring.seeds.empty()) throw emcc::ConfigError("key file lists no seed");
                return ring.seeds.front();
            }();
            const auto r = emcc::enroll(cfg, read_record(enroll_in, common.iso), seed);
            emcc::write_template_file(r.tmpl, enroll_out);
            std::cout << "features " << r.tmpl.features.size() << "\n"
                      << "payload_bits " << r.payload_bits << "\n"
                      << "file_bytes " << r.total_bytes << "\n"
                      << "seed_id " << hex_id(r.tmpl.header.seed_id) << "\n";
            return 0;
        }
        if (*match) {
            const auto cfg = load(common);
            const auto r = emcc::match(cfg, keys_of(cfg), read_record(match_query, common.iso),
                                       emcc::read_template_file(match_tmpl));
            std::cout << "score " << std::setprecision(4) << r.score << "\n"
                      << (r.is_match ? "match" : "non-match") << " at threshold " << cfg.match_threshold << "\n";
            return r.is_match ? 0 : 1;
        }
        if (*revoke) {
            const auto cfg = load(common);
            const auto r = emcc::revoke(cfg, emcc::read_template_file(revoke_old), revoke_seed,
                                        read_record(revoke_src, common.iso));
            emcc::write_template_file(r.tmpl, revoke_out);
            std::cout << "old_seed_id " << hex_id(r.old_seed_id) << "\n"
                      << "new_seed_id " << hex_id(r.new_seed_id) << "\n"
                      << "old_vs_new_score " << std::setprecision(4) << r.cross_key_score << "\n"
                      << (r.cross_key_score < cfg.match_threshold ? "old template no longer matches"
                                                                  : "warning: old template still matches")
                      << "\n";
            return 0;
        }
        if (*evaluate) {
            const auto cfg = load(common);
            emcc::EvaluateRequest req;
            req.seed = eval_seed;
            if (eval_dir) {
                req.dataset = *eval_dir;
            } else if (!eval_synth.empty()) {
                emcc::SynthParams sp;
                sp.fingers = eval_synth[0];
                sp.impressions = eval_synth[1];
                sp.seed = eval_synth[2];
                req.synthetic = sp;
            } else if (cfg.dataset_path) {
                req.dataset = *cfg.dataset_path;
            }
            if (eval_out) req.out_dir = *eval_out;
            const auto rep = emcc::evaluate(cfg, req);
            std::cout << "genuine " << rep.genuine.size() << "\n"
                      << "imposter " << rep.imposter.size() << "\n"
                      << std::setprecision(3) << "EER " << rep.eer << "%\n"
                      << "FMR1000 " << rep.fmr1000 << "%\n";
            return 0;
        }
        if (*stats) {
            const auto cfg = load(common);
            emcc::Dataset ds;
            if (stats_dir) {
                ds = emcc::load_dataset(*stats_dir, common.iso ? emcc::MinutiaeFormat::IsoLikeBinary
                                                               : emcc::MinutiaeFormat::PlainText);
            } else if (!stats_synth.empty()) {
                emcc::SynthParams sp;
                sp.fingers = stats_synth[0];
                sp.impressions = stats_synth[1];
                sp.seed = stats_synth[2];
                ds = emcc::make_dataset(emcc::synth_records(sp));
            } else {
                throw emcc::DatasetShapeError("give a dataset directory or --synthetic");
            }
            std::vector<emcc::CylinderFeature> all;
            for (const auto& r : ds.records) {
                auto f = emcc::valid_cylinders(emcc::build_cylinders(r, cfg.mcc));
                all.insert(all.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
            }
            const auto st = emcc::code_distribution_stats(all, emcc::key_from_config(cfg, stats_seed));
            const auto eb = emcc::CodeStats::frequencies(st.e_bar);
            const auto eh = emcc::CodeStats::frequencies(st.e_hat);
            std::cout << "features " << st.features << "\n" << std::setprecision(4);
            std::cout << "code   e_bar   e_hat\n";
            const char* names[] = {"00", "01", "10", "11"};
            for (int i = 0; i < 4; ++i) std::cout << names[i] << "     " << eb[i] << "  " << eh[i] << "\n";
            const double p[] = {eb[0], eb[1], eb[2]};
            const double n[] = {120, 20, 20};
            std::cout << "log10_collision_probability " << std::setprecision(3)
                      << emcc::log10_product_of_powers(p, n) << "\n";
            return 0;
        }
        if (*synth) {
            emcc::SynthParams sp;
            sp.fingers = synth_shape[0];
            sp.impressions = synth_shape[1];
            sp.seed = synth_shape[2];
            emcc::synth_dataset(sp, synth_dir);
            std::cout << "records " << sp.fingers * sp.impressions << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
