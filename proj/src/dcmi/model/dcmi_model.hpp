#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dcmi/autodiff/graph.hpp"
#include "dcmi/text/encoder.hpp"

namespace dcmi::model {

enum class Variant { dcmi, dcmi_no_dom, dcmi_no_dom_no_con, d_al, mtl };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct VariantFeatures {
  bool masks = false;             // domain embeddings + masked representation
  bool domain_classifier = false; // L_dom trains the domain head
  bool contrastive = false;       // L_con
  bool per_domain_heads = false;  // MTL
};
VariantFeatures features(Variant v);

enum class Group { body, domain_embeddings, supervised_head, domain_head };
enum class LossTerm { sup, dom, con };

std::string_view to_string(Group g);
std::string_view to_string(LossTerm t);

// Groups each loss term is allowed to update. Every other group must receive
// exactly zero gradient from that term.
const std::set<Group>& routed_groups(LossTerm term);

struct ParameterGroups {
  std::map<Group, std::vector<ad::Parameter*>> members;
  std::vector<ad::Parameter*> all() const;
};

struct ModelConfig {
  Variant variant = Variant::dcmi;
  text::EncoderConfig encoder;
  std::size_t num_classes = 2;
  std::size_t num_domains = 1;
  double tau_min = 0.0025;
  double mask_init_std = 0.0;
  bool pin_masks = false;    // masks fixed to all-ones (equivalence checks)
  bool compensate = true;    // gradient compensation on domain embeddings
};

struct Batch {
  text::TokenBatch tokens;
  std::vector<int> labels;
  std::vector<int> domains;
  std::size_t size() const { return tokens.size(); }
};

// Values the objective treats as constants: the domain head's input (h under
// stop-gradient) and the relevance scores a. Supplying them pins both at a
// reference point, which is what finite-difference checks need to see the
// same function the analytic gradient differentiates.
struct DetachedInputs {
  ad::Tensor domain_input;
  ad::Tensor relevance;
};

struct StepSettings {
  double tau = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  text::Mode mode = text::Mode::train;
  std::mt19937_64* dropout_rng = nullptr;
  const DetachedInputs* detached = nullptr;
};

struct Losses {
  ad::Var total;
  ad::Var sup;
  ad::Var dom;  // unbound when the term is disabled or its weight is 0
  ad::Var con;
  DetachedInputs detached;  // what this pass used; empty tensors when unused
};

// How evaluation picks the mask of a sample.
enum class EvalDomain { record, argmax };

struct Affine {
  Affine(std::string name, std::size_t in, std::size_t out, std::mt19937_64& rng);
  ad::Var apply(ad::Graph& g, const ad::Var& x);
  ad::Parameter weight;
  ad::Parameter bias;
};

// Shared body, domain embedding table, supervised head(s) and domain
// classifier head. Parameters have stable addresses, so the model is neither
// copyable nor movable; use state()/load_state() for snapshots.
class DcmiModel {
 public:
  DcmiModel(const ModelConfig& config, std::uint64_t seed);
  DcmiModel(const DcmiModel&) = delete;
  DcmiModel& operator=(const DcmiModel&) = delete;

  const ModelConfig& config() const { return config_; }
  VariantFeatures features() const { return features_; }

  // Body output h, (batch x d).
  ad::Var body(ad::Graph& g, const Batch& batch, text::Mode mode, std::mt19937_64* dropout_rng);
  // All domain masks at temperature tau, (M x d).
  ad::Var masks(ad::Graph& g, double tau);
  // Domain classifier logits on stop_gradient(h), (batch x M).
  ad::Var domain_logits(ad::Graph& g, const ad::Var& h);

  // Builds L = L_sup + lambda1 L_dom + lambda2 L_con for the batch.
  Losses forward(ad::Graph& g, const Batch& batch, const StepSettings& step);

  // P(class 1) per sample in eval mode at tau_min.
  std::vector<double> positive_scores(const Batch& batch, EvalDomain mode = EvalDomain::record);
  // Eval-mode body output and masked representation (domain of record), both (batch x d).
  std::pair<ad::Tensor, ad::Tensor> representations(const Batch& batch);

  // Temperature used by the gradient compensation transform.
  void set_temperature(double tau) { tau_ = tau; }
  double temperature() const { return tau_; }
  std::size_t clamped_coordinates() const { return clamped_; }

  ParameterGroups groups();
  std::vector<ad::Parameter*> parameters() { return groups().all(); }
  std::vector<ad::Tensor> state();
  void load_state(const std::vector<ad::Tensor>& state);

  text::Encoder encoder;
  std::unique_ptr<ad::Parameter> domain_embeddings;  // (M x d); null without masks
  std::vector<Affine> supervised_heads;              // one, or one per domain for MTL
  std::unique_ptr<Affine> domain_head;               // null without masks

 private:
  ad::Var supervised_logits_loss(ad::Graph& g, const ad::Var& h, const ad::Var& mask_table, const Batch& batch);

  ModelConfig config_;
  VariantFeatures features_;
  double tau_ = 1.0;
  std::size_t clamped_ = 0;
};

// Runs each loss term's backward in isolation (eval mode) and returns the
// largest absolute gradient per group. Gradients are zeroed afterwards.
struct RoutingProbe {
  std::map<LossTerm, std::map<Group, double>> max_abs_grad;
  std::vector<std::string> violations;  // groups outside the routing table with nonzero gradient
  bool ok() const { return violations.empty(); }
};
RoutingProbe probe_routing(DcmiModel& model, const Batch& batch, double tau);

}  // namespace dcmi::model
