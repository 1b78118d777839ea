#include "emcc/workflow.hpp"

#include "emcc/error.hpp"
#include "emcc/matcher.hpp"
#include "emcc/pipeline.hpp"

namespace emcc {

TransformKey key_from_config(const Config& config, std::uint64_t seed) {
    TransformKey k = config.transform;
    k.seed = seed;
    k.validate();
    return k;
}

TransformKey key_for_header(const TemplateHeader& header, const KeyRing& keys) {
    const auto seed = keys.find(header.seed_id);
    if (!seed) throw KeyMismatch("no known key has the template's seed identifier");
    TransformKey k;
    k.seed = *seed;
    k.p_num = header.p_num;
    k.p_den = header.p_den;
    k.tau_millis = header.tau_millis;
    k.depth = header.depth;
    k.validate();
    return k;
}

EnrollResult enroll(const Config& config, const MinutiaeRecord& record, std::uint64_t seed) {
    const TransformKey key = key_from_config(config, seed);
    EnrollResult r;
    r.tmpl = enroll_record(record, config.mcc, key);
    if (r.tmpl.features.empty()) throw Error("no valid features");
    r.payload_bits = r.tmpl.payload_bits();
    r.total_bytes = kTemplateHeaderBytes + (r.payload_bits + 7) / 8;
    return r;
}

MatchResult match(const Config& config, const KeyRing& keys, const MinutiaeRecord& query,
                  const CancelableTemplate& enrolled) {
    const TransformKey key = key_for_header(enrolled.header, keys);
    if (key.unit_count(config.mcc.cell_count()) != enrolled.header.units) {
        throw KeyMismatch("template unit count does not match the configured cylinder size");
    }
    const CancelableTemplate q = enroll_record(query, config.mcc, key);
    MatchResult r;
    if (q.features.empty() || enrolled.features.empty()) return r;
    const auto d = match_templates(q, enrolled, config.greedy);
    r.score = d.score;
    r.pairs_used = d.pairs_used.size();
    r.is_match = d.score >= config.match_threshold;
    return r;
}

double cross_key_decision_score(const CancelableTemplate& a, const CancelableTemplate& b, const GreedyParams& gp) {
    if (a.header.units != b.header.units) throw KeyMismatch("templates differ in unit count");
    if (a.features.empty() || b.features.empty()) return 0.0;
    return greedy_decision_score(similarity_matrix(a.features, b.features), gp).score;
}

RevokeResult revoke(const Config& config, const CancelableTemplate& old_template, std::uint64_t new_seed,
                    const MinutiaeRecord& source) {
    RevokeResult r;
    r.old_seed_id = old_template.header.seed_id;
    r.new_seed_id = seed_identifier(new_seed);
    if (r.new_seed_id == r.old_seed_id) throw SameSeedError("new seed equals the revoked template's seed");
    TransformKey key;
    key.seed = new_seed;
    key.p_num = old_template.header.p_num;
    key.p_den = old_template.header.p_den;
    key.tau_millis = old_template.header.tau_millis;
    key.depth = old_template.header.depth;
    r.tmpl = enroll_record(source, config.mcc, key);
    if (r.tmpl.features.empty()) throw Error("no valid features");
    r.cross_key_score = cross_key_decision_score(old_template, r.tmpl, config.greedy);
    return r;
}

EvalReport evaluate(const Config& config, const EvaluateRequest& req) {
    EvalSettings s{key_from_config(config, req.seed), config.mcc, config.greedy};
    EvalReport rep;
    if (req.dataset) {
        rep = run_fvc_protocol(*req.dataset, s);
    } else if (req.synthetic) {
        rep = run_fvc_protocol(make_dataset(synth_records(*req.synthetic)), s);
    } else {
        throw DatasetShapeError("no dataset directory or synthetic parameters given");
    }
    if (!req.out_dir.empty()) write_report_files(rep, req.out_dir);
    return rep;
}

}  // namespace emcc
