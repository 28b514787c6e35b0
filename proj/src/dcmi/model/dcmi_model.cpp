#include "dcmi/model/dcmi_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcmi/autodiff/ops.hpp"
#include "dcmi/model/components.hpp"
#include "dcmi/seed.hpp"

namespace dcmi::model {

namespace {

enum Stream : std::uint64_t { kEncoderInit = 1, kHeadInit = 2, kDomainInit = 3 };

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::dcmi: return "dcmi";
    case Variant::dcmi_no_dom: return "dcmi_no_dom";
    case Variant::dcmi_no_dom_no_con: return "dcmi_no_dom_no_con";
    case Variant::d_al: return "d_al";
    case Variant::mtl: return "mtl";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (auto v : {Variant::dcmi, Variant::dcmi_no_dom, Variant::dcmi_no_dom_no_con, Variant::d_al, Variant::mtl}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

VariantFeatures features(Variant v) {
  switch (v) {
    case Variant::dcmi: return {true, true, true, false};
    case Variant::dcmi_no_dom: return {true, false, true, false};
    case Variant::dcmi_no_dom_no_con: return {true, false, false, false};
    case Variant::d_al: return {false, false, false, false};
    case Variant::mtl: return {false, false, false, true};
  }
  return {};
}

std::string_view to_string(Group g) {
  switch (g) {
    case Group::body: return "body";
    case Group::domain_embeddings: return "domain_embeddings";
    case Group::supervised_head: return "supervised_head";
    case Group::domain_head: return "domain_head";
  }
  return "?";
}

std::string_view to_string(LossTerm t) {
  switch (t) {
    case LossTerm::sup: return "L_sup";
    case LossTerm::dom: return "L_dom";
    case LossTerm::con: return "L_con";
  }
  return "?";
}

const std::set<Group>& routed_groups(LossTerm term) {
  static const std::set<Group> sup{Group::body, Group::domain_embeddings, Group::supervised_head};
  static const std::set<Group> dom{Group::domain_head};
  static const std::set<Group> con{Group::body, Group::domain_embeddings};
  switch (term) {
    case LossTerm::sup: return sup;
    case LossTerm::dom: return dom;
    case LossTerm::con: return con;
  }
  return sup;
}

std::vector<ad::Parameter*> ParameterGroups::all() const {
  std::vector<ad::Parameter*> out;
  for (const auto& [group, params] : members) out.insert(out.end(), params.begin(), params.end());
  return out;
}

Affine::Affine(std::string name, std::size_t in, std::size_t out, std::mt19937_64& rng)
    : weight(name + ".weight", text::glorot(in, out, rng)), bias(name + ".bias", ad::Tensor({out})) {}

ad::Var Affine::apply(ad::Graph& g, const ad::Var& x) {
  return ad::add_row(ad::matmul(x, g.param(weight)), g.param(bias));
}

namespace {

text::Encoder make_encoder(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kEncoderInit));
  return text::Encoder(config.encoder, rng);
}

}  // namespace

DcmiModel::DcmiModel(const ModelConfig& config, std::uint64_t seed)
    : encoder(make_encoder(config, seed)), config_(config), features_(model::features(config.variant)) {
  if (config.num_classes < 2) throw std::invalid_argument("need at least two classes");
  if (config.num_domains < 1) throw std::invalid_argument("need at least one domain");
  if (!(config.tau_min > 0.0 && config.tau_min <= 1.0)) throw std::invalid_argument("tau_min must be in (0,1]");
  const std::size_t d = config.encoder.output_dim;

  std::mt19937_64 head_rng(derive_seed(seed, kHeadInit));
  const std::size_t heads = features_.per_domain_heads ? config.num_domains : 1;
  supervised_heads.reserve(heads);
  for (std::size_t k = 0; k < heads; ++k) {
    const std::string name = heads == 1 ? "supervised_head" : "supervised_head." + std::to_string(k);
    supervised_heads.emplace_back(name, d, config.num_classes, head_rng);
  }

  if (features_.masks) {
    std::mt19937_64 rng(derive_seed(seed, kDomainInit));
    ad::Tensor v({config.num_domains, d});
    if (config.mask_init_std > 0.0) {
      std::normal_distribution<double> n(0.0, config.mask_init_std);
      for (auto& x : v.values()) x = n(rng);
    }
    domain_embeddings = std::make_unique<ad::Parameter>("domain_embeddings", std::move(v));
    domain_head = std::make_unique<Affine>("domain_head", d, config.num_domains, rng);
    if (config.compensate) {
      domain_embeddings->set_gradient_transform([this](ad::Tensor& grad) {
        std::size_t clamped = 0;
        grad = compensate_gradient(grad, domain_embeddings->value, tau_, config_.tau_min, &clamped);
        clamped_ += clamped;
      });
    }
  }
}

ad::Var DcmiModel::body(ad::Graph& g, const Batch& batch, text::Mode mode, std::mt19937_64* dropout_rng) {
  return encoder.encode(g, batch.tokens, mode, dropout_rng);
}

ad::Var DcmiModel::masks(ad::Graph& g, double tau) {
  if (!features_.masks) throw std::logic_error("variant has no domain masks");
  if (config_.pin_masks) {
    return g.constant(ad::Tensor({config_.num_domains, config_.encoder.output_dim}, 1.0));
  }
  return domain_mask(g.param(*domain_embeddings), tau);
}

ad::Var DcmiModel::domain_logits(ad::Graph& g, const ad::Var& h) {
  if (!domain_head) throw std::logic_error("variant has no domain classifier");
  return domain_head->apply(g, ad::stop_gradient(h));
}

namespace {

std::vector<std::size_t> as_indices(const std::vector<int>& ids, std::size_t limit, const char* what) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= limit) {
      throw std::out_of_range(std::string(what) + " " + std::to_string(id) + " out of range");
    }
    out.push_back(static_cast<std::size_t>(id));
  }
  return out;
}

}  // namespace

ad::Var DcmiModel::supervised_logits_loss(ad::Graph& g, const ad::Var& h, const ad::Var& mask_table,
                                          const Batch& batch) {
  if (features_.per_domain_heads) {
    const auto n = static_cast<double>(batch.size());
    ad::Var total;
    for (std::size_t j = 0; j < config_.num_domains; ++j) {
      std::vector<std::size_t> rows;
      std::vector<int> labels;
      for (std::size_t r = 0; r < batch.size(); ++r) {
        if (batch.domains[r] == static_cast<int>(j)) {
          rows.push_back(r);
          labels.push_back(batch.labels[r]);
        }
      }
      if (rows.empty()) continue;
      ad::Var logits = supervised_heads[j].apply(g, ad::gather_rows(h, rows));
      ad::Var term = ad::scale(supervised_loss(logits, labels), static_cast<double>(rows.size()) / n);
      total = total.valid() ? ad::add(total, term) : term;
    }
    return total;
  }
  ad::Var rep = h;
  if (features_.masks) {
    const auto rows = as_indices(batch.domains, config_.num_domains, "domain");
    rep = mask_representation(h, ad::gather_rows(mask_table, rows));
  }
  return supervised_loss(supervised_heads.front().apply(g, rep), batch.labels);
}

Losses DcmiModel::forward(ad::Graph& g, const Batch& batch, const StepSettings& step) {
  if (batch.size() == 0 || batch.labels.size() != batch.size() || batch.domains.size() != batch.size()) {
    throw std::invalid_argument("malformed batch");
  }
  if (step.lambda1 < 0.0 || step.lambda2 < 0.0) throw std::invalid_argument("loss weights must be >= 0");
  as_indices(batch.domains, config_.num_domains, "domain");

  Losses out;
  ad::Var h = body(g, batch, step.mode, step.dropout_rng);
  ad::Var table;
  if (features_.masks) table = masks(g, step.tau);
  out.sup = supervised_logits_loss(g, h, table, batch);
  out.total = out.sup;
  if (!features_.masks) return out;

  const bool need_dom = features_.domain_classifier && step.lambda1 > 0.0;
  const bool need_con = features_.contrastive && step.lambda2 > 0.0;
  ad::Var dom_logits;
  auto logits = [&] {
    if (dom_logits.valid()) return dom_logits;
    if (step.detached) {
      dom_logits = domain_head->apply(g, g.constant(step.detached->domain_input));
    } else {
      dom_logits = domain_logits(g, h);
    }
    out.detached.domain_input = step.detached ? step.detached->domain_input : h.value();
    return dom_logits;
  };
  if (need_dom) {
    out.dom = domain_loss(logits(), batch.domains);
    out.total = ad::add(out.total, ad::scale(out.dom, step.lambda1));
  }
  if (need_con) {
    ad::Tensor relevance;
    if (step.detached) {
      relevance = step.detached->relevance;
    } else if (features_.domain_classifier) {
      relevance = logits().value();
      for (auto& x : relevance.values()) x = ad::sigmoid(x);
    } else {
      relevance = one_hot(batch.domains, config_.num_domains);
    }
    out.detached.relevance = relevance;
    std::vector<ad::Var> hhat;
    hhat.reserve(config_.num_domains);
    for (std::size_t j = 0; j < config_.num_domains; ++j) {
      const std::size_t row[] = {j};
      hhat.push_back(mask_representation(h, ad::gather_rows(table, row)));
    }
    ad::Var view = augmented_view(hhat, relevance);
    out.con = contrastive_loss(view, hhat, relevance);
    out.total = ad::add(out.total, ad::scale(out.con, step.lambda2));
  }
  return out;
}

std::vector<double> DcmiModel::positive_scores(const Batch& batch, EvalDomain mode) {
  ad::Graph g;
  ad::Var h = body(g, batch, text::Mode::eval, nullptr);
  const std::size_t n = batch.size();
  std::vector<double> scores(n);

  auto positive = [&](const ad::Tensor& logits, std::size_t row) {
    return ad::softmax_rows(ad::Tensor::vector({logits.values().begin() + static_cast<std::ptrdiff_t>(row * logits.cols()),
                                                logits.values().begin() + static_cast<std::ptrdiff_t>((row + 1) * logits.cols())}))[1];
  };

  if (features_.per_domain_heads) {
    for (std::size_t j = 0; j < config_.num_domains; ++j) {
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < n; ++r)
        if (batch.domains[r] == static_cast<int>(j)) rows.push_back(r);
      if (rows.empty()) continue;
      const auto logits = supervised_heads[j].apply(g, ad::gather_rows(h, rows)).value();
      for (std::size_t k = 0; k < rows.size(); ++k) scores[rows[k]] = positive(logits, k);
    }
    return scores;
  }

  ad::Var rep = h;
  if (features_.masks) {
    std::vector<std::size_t> rows;
    if (mode == EvalDomain::argmax) {
      const auto logits = domain_logits(g, h).value();
      const std::size_t m = logits.cols();
      for (std::size_t r = 0; r < n; ++r) {
        auto first = logits.values().begin() + static_cast<std::ptrdiff_t>(r * m);
        rows.push_back(static_cast<std::size_t>(std::max_element(first, first + static_cast<std::ptrdiff_t>(m)) - first));
      }
    } else {
      rows = as_indices(batch.domains, config_.num_domains, "domain");
    }
    rep = mask_representation(h, ad::gather_rows(masks(g, config_.tau_min), rows));
  }
  const auto logits = supervised_heads.front().apply(g, rep).value();
  for (std::size_t r = 0; r < n; ++r) scores[r] = positive(logits, r);
  return scores;
}

std::pair<ad::Tensor, ad::Tensor> DcmiModel::representations(const Batch& batch) {
  ad::Graph g;
  ad::Var h = body(g, batch, text::Mode::eval, nullptr);
  if (!features_.masks) return {h.value(), h.value()};
  const auto rows = as_indices(batch.domains, config_.num_domains, "domain");
  ad::Var hhat = mask_representation(h, ad::gather_rows(masks(g, config_.tau_min), rows));
  return {h.value(), hhat.value()};
}

ParameterGroups DcmiModel::groups() {
  ParameterGroups groups;
  groups.members[Group::body] = encoder.parameters();
  auto& sup = groups.members[Group::supervised_head];
  for (auto& head : supervised_heads) {
    sup.push_back(&head.weight);
    sup.push_back(&head.bias);
  }
  if (domain_embeddings) groups.members[Group::domain_embeddings] = {domain_embeddings.get()};
  if (domain_head) groups.members[Group::domain_head] = {&domain_head->weight, &domain_head->bias};
  return groups;
}

std::vector<ad::Tensor> DcmiModel::state() {
  std::vector<ad::Tensor> out;
  for (auto* p : parameters()) out.push_back(p->value);
  return out;
}

void DcmiModel::load_state(const std::vector<ad::Tensor>& state) {
  auto params = parameters();
  if (state.size() != params.size()) throw std::invalid_argument("state does not match model parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state[i].same_shape(params[i]->value)) throw std::invalid_argument("state shape mismatch for " + params[i]->name());
    params[i]->value = state[i];
  }
}

RoutingProbe probe_routing(DcmiModel& model, const Batch& batch, double tau) {
  RoutingProbe probe;
  auto groups = model.groups();
  auto zero = [&] {
    for (auto* p : groups.all()) p->zero_grad();
  };
  const StepSettings step{.tau = tau, .lambda1 = 1.0, .lambda2 = 1.0, .mode = text::Mode::eval};
  for (auto term : {LossTerm::sup, LossTerm::dom, LossTerm::con}) {
    zero();
    ad::Graph g;
    Losses losses = model.forward(g, batch, step);
    const ad::Var& v = term == LossTerm::sup ? losses.sup : term == LossTerm::dom ? losses.dom : losses.con;
    if (!v.valid()) continue;
    g.backward(v);
    const auto& allowed = routed_groups(term);
    for (const auto& [group, params] : groups.members) {
      double mx = 0.0;
      for (auto* p : params)
        for (double x : p->grad.values()) mx = std::max(mx, std::abs(x));
      probe.max_abs_grad[term][group] = mx;
      if (mx != 0.0 && !allowed.contains(group)) {
        probe.violations.push_back(std::string(to_string(term)) + " reached " + std::string(to_string(group)));
      }
    }
  }
  zero();
  return probe;
}

}  // namespace dcmi::model
