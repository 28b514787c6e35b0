#include "dcmi/model/export.hpp"

#include <cstdio>
#include <stdexcept>

#include "dcmi/io/atomic_file.hpp"

namespace dcmi::model {

namespace {

void append_number(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  out += buf;
}

}  // namespace

std::string representations_csv(DcmiModel& model, const Batch& batch, std::span<const std::size_t> sample_ids) {
  if (sample_ids.size() != batch.size()) throw std::invalid_argument("one sample id per batch row required");
  const auto [h, hhat] = model.representations(batch);
  const std::size_t d = h.cols();

  std::string out = "sample_id,domain_id";
  for (std::size_t k = 0; k < d; ++k) out += ",h_" + std::to_string(k);
  for (std::size_t k = 0; k < d; ++k) out += ",hhat_" + std::to_string(k);
  out += '\n';
  for (std::size_t r = 0; r < batch.size(); ++r) {
    out += std::to_string(sample_ids[r]);
    out += ',';
    out += std::to_string(batch.domains[r]);
    for (const auto* t : {&h, &hhat}) {
      for (std::size_t k = 0; k < d; ++k) {
        out += ',';
        append_number(out, t->at(r, k));
      }
    }
    out += '\n';
  }
  return out;
}

void export_representations(DcmiModel& model, const Batch& batch, std::span<const std::size_t> sample_ids,
                            const std::filesystem::path& path) {
  io::write_file_atomic(path, representations_csv(model, batch, sample_ids));
}

}  // namespace dcmi::model
