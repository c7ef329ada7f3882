#pragma once

// Continual learner state and the four knowledge-transfer procedures.
//
// The knowledge base keeps, per task, a partially converged model snapshot
// and the retained train/test splits. Transfer realizes restricted
// within-class search as: initialize from existing knowledge, then fine-tune
// with a reduced hidden-layer learning rate (TrainConfig::hidden_lr_factor).
// Partial snapshots are deliberately kept partially converged and are never
// overwritten; refined hypotheses land in a separate converged_model slot.
//
// Derived-seed tags used by the procedures (see rng.hpp for the hash):
//   forward:  "fwd_sample:<id>", "fwd_split:<id>", "fwd_bias",
//             "fwd_baseline_init:<id>", "fwd_partial_init:<id>"
//   backward: "bwd_baseline_init:<id>", step k>1 of a sequence: ("seq_step", k)
//   enroll:   "sample:<id>", "split:<id>", "init:<id>"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contrail/environment.hpp"
#include "contrail/errors.hpp"
#include "contrail/learner.hpp"
#include "contrail/rng.hpp"

namespace contrail {

struct KbEntry {
    MlpModel partial_model;
    std::optional<MlpModel> converged_model;
    Sample train_sample;
    Sample test_sample;
};

class KnowledgeBase {
public:
    void add_entry(const std::string& id, KbEntry entry) {
        if (entries_.count(id)) throw ValidationError("KnowledgeBase: duplicate task id " + id);
        if (!entry.partial_model.w1.empty() && entry.partial_model.converged)
            throw ValidationError("KnowledgeBase: partial model must not be converged: " + id);
        entries_.emplace(id, std::move(entry));
        arrival_order_.push_back(id);
    }

    bool contains(const std::string& id) const { return entries_.count(id) != 0; }

    const KbEntry& entry(const std::string& id) const {
        auto it = entries_.find(id);
        if (it == entries_.end()) throw LookupError("KnowledgeBase: unknown task id " + id);
        return it->second;
    }

    void set_converged(const std::string& id, MlpModel m) {
        auto it = entries_.find(id);
        if (it == entries_.end()) throw LookupError("KnowledgeBase: unknown task id " + id);
        it->second.converged_model = std::move(m);
    }

    const std::vector<std::string>& arrival_order() const { return arrival_order_; }
    std::size_t size() const { return arrival_order_.size(); }

private:
    std::map<std::string, KbEntry> entries_;
    std::vector<std::string> arrival_order_;
};

enum class TransferDirection { none, forward, backward };

inline const char* direction_name(TransferDirection d) {
    switch (d) {
        case TransferDirection::forward: return "forward";
        case TransferDirection::backward: return "backward";
        default: return "none";
    }
}

struct TransferOutcome {
    std::string task_id;
    TransferDirection direction = TransferDirection::none;
    std::vector<std::string> sources_used;
    MlpModel model;
    double r2_isolated_baseline = 0.0; // held-out test split, paired splits
    double r2_after_transfer = 0.0;    // held-out test split
    std::uint64_t repetition_seed = 0;
};

namespace detail {

inline TrainConfig unrestricted(TrainConfig cfg) {
    cfg.hidden_lr_factor = 1.0;
    return cfg;
}

/// Joint auxiliary training explores more of the hidden layer than the
/// within-class fine-tune, but stays anchored to the source neighborhood.
inline TrainConfig aux_config(TrainConfig cfg) {
    cfg.hidden_lr_factor = cfg.aux_hidden_lr_factor;
    return cfg;
}

inline Sample pool_samples(const std::vector<const Sample*>& parts) {
    Sample pooled;
    std::string joined;
    for (const Sample* s : parts) {
        pooled.points.insert(pooled.points.end(), s->points.begin(), s->points.end());
        if (!joined.empty()) joined += '+';
        joined += s->source_task;
    }
    pooled.source_task = joined;
    return pooled;
}

} // namespace detail

/// Generate a task's sample, split it, and store it with a from-scratch
/// partially trained model. This is how the harness populates a knowledge
/// base before a scenario runs.
inline void enroll_task(KnowledgeBase& kb, const TaskSpec& spec, const TrainConfig& cfg,
                        double train_fraction, int hidden_units, std::uint64_t seed) {
    const Sample sample = generate_sample(spec, derive_seed(seed, "sample:" + spec.id));
    auto [train_s, test_s] = split_sample(sample, train_fraction,
                                          derive_seed(seed, "split:" + spec.id));
    MlpModel fresh = init_model(hidden_units, derive_seed(seed, "init:" + spec.id));
    MlpModel partial = train(fresh, train_s, detail::unrestricted(cfg), TrainMode::partial);
    kb.add_entry(spec.id, {std::move(partial), std::nullopt, std::move(train_s), std::move(test_s)});
}

/// The bias model [h*] that defines the restricted search space for a new
/// target. One source: its stored partial snapshot, unchanged. Several
/// sources: a fresh model fully trained on the pooled source training
/// samples (pooled-init seed comes from cfg.seed).
inline MlpModel select_bias_forward(const KnowledgeBase& kb,
                                    const std::vector<std::string>& source_ids,
                                    const TrainConfig& cfg) {
    if (source_ids.empty()) throw ValidationError("select_bias_forward: no source tasks given");
    std::vector<const Sample*> parts;
    parts.reserve(source_ids.size());
    for (const std::string& id : source_ids) parts.push_back(&kb.entry(id).train_sample);

    if (source_ids.size() == 1) return kb.entry(source_ids.front()).partial_model;

    const Sample pooled = detail::pool_samples(parts);
    const int hidden = kb.entry(source_ids.front()).partial_model.hidden_units;
    MlpModel fresh = init_model(hidden, derive_seed(cfg.seed, "bias_init"));
    return train(fresh, pooled, detail::unrestricted(cfg), TrainMode::full);
}

namespace detail {

struct ForwardParts {
    TransferOutcome outcome;
    Sample train_split;
    Sample test_split;
};

inline ForwardParts forward_transfer_core(const KnowledgeBase& kb,
                                          const std::vector<std::string>& source_ids,
                                          const TaskSpec& target, const TrainConfig& cfg,
                                          std::uint64_t seed, double train_fraction) {
    const Sample sample = generate_sample(target, derive_seed(seed, "fwd_sample:" + target.id));
    auto [train_s, test_s] =
        split_sample(sample, train_fraction, derive_seed(seed, "fwd_split:" + target.id));

    TrainConfig bias_cfg = cfg;
    bias_cfg.seed = derive_seed(seed, "fwd_bias");
    const MlpModel bias = select_bias_forward(kb, source_ids, bias_cfg);

    // restricted fine-tune on the target's training split
    const MlpModel transferred = train(bias, train_s, cfg, TrainMode::full);

    MlpModel baseline_init =
        init_model(bias.hidden_units, derive_seed(seed, "fwd_baseline_init:" + target.id));
    const MlpModel baseline =
        train(baseline_init, train_s, unrestricted(cfg), TrainMode::full);

    ForwardParts parts;
    parts.outcome = {target.id,
                     TransferDirection::forward,
                     source_ids,
                     transferred,
                     r_squared(baseline, test_s).r2,
                     r_squared(transferred, test_s).r2,
                     seed};
    parts.train_split = std::move(train_s);
    parts.test_split = std::move(test_s);
    return parts;
}

inline void add_fresh_partial(KnowledgeBase& kb, const TaskSpec& target, const TrainConfig& cfg,
                              std::uint64_t seed, int hidden_units, Sample train_s,
                              Sample test_s) {
    MlpModel fresh = init_model(hidden_units, derive_seed(seed, "fwd_partial_init:" + target.id));
    MlpModel partial = train(fresh, train_s, unrestricted(cfg), TrainMode::partial);
    kb.add_entry(target.id, {std::move(partial), std::nullopt, std::move(train_s), std::move(test_s)});
}

} // namespace detail

/// Forward transfer into a new target task: generate and split its sample,
/// start from the bias model, fine-tune to convergence with restricted
/// hidden-layer exploration, and score against an independently initialized
/// isolated model on the same splits. The target then joins the knowledge
/// base with its own from-scratch partial snapshot.
inline TransferOutcome forward_transfer(KnowledgeBase& kb,
                                        const std::vector<std::string>& source_ids,
                                        const TaskSpec& target, const TrainConfig& cfg,
                                        std::uint64_t seed, double train_fraction = 0.75) {
    auto parts = detail::forward_transfer_core(kb, source_ids, target, cfg, seed, train_fraction);
    const int hidden = parts.outcome.model.hidden_units;
    detail::add_fresh_partial(kb, target, cfg, seed, hidden, std::move(parts.train_split),
                              std::move(parts.test_split));
    return parts.outcome;
}

/// Order-aware forward transfer: one outcome per checkpoint, where
/// checkpoint n uses exactly the first n tasks of the arrival order as
/// sources. Checkpoints share the target sample, splits and baseline (same
/// derived seeds), so their comparison is paired. The target joins the
/// knowledge base once, after the checkpoints ran.
inline std::vector<TransferOutcome> forward_transfer_at_times(
    KnowledgeBase& kb, const TaskSpec& target, const std::vector<std::size_t>& times,
    const TrainConfig& cfg, std::uint64_t seed, double train_fraction = 0.75) {
    for (std::size_t count : times)
        if (count < 1 || count > kb.size())
            throw ValidationError("forward_transfer_at_times: checkpoint exceeds knowledge base");

    std::vector<TransferOutcome> outcomes;
    outcomes.reserve(times.size());
    detail::ForwardParts last;
    for (std::size_t count : times) {
        const std::vector<std::string> sources(kb.arrival_order().begin(),
                                               kb.arrival_order().begin() +
                                                   static_cast<std::ptrdiff_t>(count));
        last = detail::forward_transfer_core(kb, sources, target, cfg, seed, train_fraction);
        outcomes.push_back(last.outcome);
    }
    if (!times.empty()) {
        const int hidden = last.outcome.model.hidden_units;
        detail::add_fresh_partial(kb, target, cfg, seed, hidden, std::move(last.train_split),
                                  std::move(last.test_split));
    }
    return outcomes;
}

namespace detail {

/// Shared backward step: auxiliary model from the source's partial snapshot,
/// jointly trained on source + pooled targets, then fine-tuned on the source
/// split alone under the hidden-layer restriction.
inline TransferOutcome backward_step(KnowledgeBase& kb, const std::string& source_id,
                                     const std::vector<std::string>& pooled_target_ids,
                                     const TrainConfig& cfg, std::uint64_t seed) {
    const KbEntry& source = kb.entry(source_id);
    if (source.partial_model.w1.empty())
        throw StateError("backward_transfer: source has no partial model: " + source_id);

    std::vector<const Sample*> parts{&source.train_sample};
    for (const std::string& id : pooled_target_ids) parts.push_back(&kb.entry(id).train_sample);
    const Sample pooled = pool_samples(parts);

    const MlpModel aux = train(source.partial_model, pooled, aux_config(cfg), TrainMode::full);
    const MlpModel refined = train(aux, source.train_sample, cfg, TrainMode::full);

    MlpModel baseline_init = init_model(refined.hidden_units,
                                        derive_seed(seed, "bwd_baseline_init:" + source_id));
    const MlpModel baseline =
        train(baseline_init, source.train_sample, unrestricted(cfg), TrainMode::full);

    TransferOutcome out{source_id,
                        TransferDirection::backward,
                        pooled_target_ids,
                        refined,
                        r_squared(baseline, source.test_sample).r2,
                        r_squared(refined, source.test_sample).r2,
                        seed};
    kb.set_converged(source_id, refined);
    return out;
}

} // namespace detail

/// Backward transfer: refine an earlier source task with knowledge from a
/// newer target task. The source's converged_model is replaced; its partial
/// snapshot stays untouched for future transfers.
inline TransferOutcome backward_transfer(KnowledgeBase& kb, const std::string& source_id,
                                         const std::string& target_id, const TrainConfig& cfg,
                                         std::uint64_t seed) {
    return detail::backward_step(kb, source_id, {target_id}, cfg, seed);
}

/// Sequential backward transfer over a stream of targets: step k pools the
/// source with every target seen so far, so later steps refine under an
/// ever larger joint sample.
inline std::vector<TransferOutcome> sequential_backward(KnowledgeBase& kb,
                                                        const std::string& source_id,
                                                        const std::vector<std::string>& target_ids,
                                                        const TrainConfig& cfg,
                                                        std::uint64_t seed) {
    std::vector<TransferOutcome> outcomes;
    outcomes.reserve(target_ids.size());
    for (std::size_t k = 0; k < target_ids.size(); ++k) {
        const std::vector<std::string> pooled(target_ids.begin(),
                                              target_ids.begin() + static_cast<std::ptrdiff_t>(k + 1));
        const std::uint64_t step_seed = k == 0 ? seed : derive_seed(seed, "seq_step", k + 1);
        outcomes.push_back(detail::backward_step(kb, source_id, pooled, cfg, step_seed));
    }
    return outcomes;
}

} // namespace contrail
