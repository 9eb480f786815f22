#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "edgecl/descriptor.hpp"

namespace edgecl::memory {

// RAM terms of one learning step, in bytes.
struct RamBreakdown {
  std::size_t n_w = 0;          // parameters of every layer
  std::size_t n_a = 0;          // one saved input per retrained layer (per sample)
  std::size_t n_g = 0;          // gradients of retrained parameters
  std::size_t n_fi = 0;         // Fisher importance, same size as n_g
  std::size_t n_fw = 0;         // largest transient forward buffer: in + out + im2col
  std::size_t new_latents = 0;  // latents of the new images, kept in RAM

  std::size_t total() const noexcept { return n_w + n_a + n_g + n_fi + n_fw + new_latents; }
  bool operator==(const RamBreakdown&) const = default;
};

struct FootprintReport {
  std::string cut_name;
  std::size_t lr_cut = 0;
  std::size_t flash_bytes = 0;  // stored replay vectors
  RamBreakdown ram;
  std::size_t ram_total_bytes = 0;

  bool operator==(const FootprintReport&) const = default;
};

// Closed-form footprint with the cut at layer index `lr_cut`. Throws
// ConfigError for an index past the last layer.
FootprintReport footprint(const NetworkDescriptor& net, std::size_t lr_cut, std::size_t n_replay,
                          std::size_t n_new, std::size_t bytes_per_elem = 4);

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

// Cuts whose RAM total fits the budget, sorted by RAM total (ties by index).
std::vector<FootprintReport> pareto_memory(const NetworkDescriptor& net, std::span<const std::size_t> cuts,
                                           std::size_t budget_ram_bytes, std::size_t n_replay, std::size_t n_new,
                                           std::size_t bytes_per_elem = 4);

// cut,lr_cut,flash_bytes,n_w_bytes,n_a_bytes,n_g_bytes,n_fi_bytes,n_fw_bytes,new_latents_bytes,ram_total_bytes
std::string footprint_csv_header();
std::string footprint_csv_row(const FootprintReport& report);
void write_footprint_csv(std::ostream& out, std::span<const FootprintReport> reports);
// Throws FormatError on a malformed table.
std::vector<FootprintReport> parse_footprint_csv(std::istream& in);

}  // namespace edgecl::memory
