#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include "dcmi/model/dcmi_model.hpp"

namespace dcmi::model {

// CSV text, one row per sample: sample_id,domain_id,h_0..h_{d-1},hhat_0..hhat_{d-1}
// with 9 significant digits. ĥ uses the domain-of-record mask at tau_min;
// variants without masks repeat h.
std::string representations_csv(DcmiModel& model, const Batch& batch, std::span<const std::size_t> sample_ids);

void export_representations(DcmiModel& model, const Batch& batch, std::span<const std::size_t> sample_ids,
                            const std::filesystem::path& path);

}  // namespace dcmi::model
