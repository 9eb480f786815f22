#include "edgecl/memory_model.hpp"

#include <algorithm>
#include <ostream>

#include "edgecl/csv.hpp"
#include "edgecl/errors.hpp"

namespace edgecl::memory {

FootprintReport footprint(const NetworkDescriptor& net, std::size_t lr_cut, std::size_t n_replay,
                          std::size_t n_new, std::size_t bytes_per_elem) {
  if (lr_cut >= net.layers.size()) {
    throw ConfigError("cut index " + std::to_string(lr_cut) + " is past the last layer of '" + net.name + "'");
  }
  const std::size_t latent = element_count(net.layers[lr_cut].in_shape);

  FootprintReport report;
  report.cut_name = net.layers[lr_cut].name;
  report.lr_cut = lr_cut;
  report.flash_bytes = n_replay * latent * bytes_per_elem;

  RamBreakdown& ram = report.ram;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const nn::LayerSpec& spec = net.layers[i];
    const std::size_t in = element_count(spec.in_shape);
    const std::size_t out = element_count(spec.out_shape);
    ram.n_w += spec.param_count() * bytes_per_elem;
    ram.n_fw = std::max(ram.n_fw, (in + out + spec.im2col_elements()) * bytes_per_elem);
    if (i >= lr_cut) {
      ram.n_a += in * bytes_per_elem;
      ram.n_g += spec.param_count() * bytes_per_elem;
    }
  }
  ram.n_fi = ram.n_g;
  ram.new_latents = n_new * latent * bytes_per_elem;
  report.ram_total_bytes = ram.total();
  return report;
}

std::vector<FootprintReport> pareto_memory(const NetworkDescriptor& net, std::span<const std::size_t> cuts,
                                           std::size_t budget_ram_bytes, std::size_t n_replay, std::size_t n_new,
                                           std::size_t bytes_per_elem) {
  std::vector<FootprintReport> feasible;
  for (std::size_t cut : cuts) {
    FootprintReport report = footprint(net, cut, n_replay, n_new, bytes_per_elem);
    if (report.ram_total_bytes <= budget_ram_bytes) feasible.push_back(std::move(report));
  }
  std::sort(feasible.begin(), feasible.end(), [](const FootprintReport& a, const FootprintReport& b) {
    return a.ram_total_bytes != b.ram_total_bytes ? a.ram_total_bytes < b.ram_total_bytes : a.lr_cut < b.lr_cut;
  });
  return feasible;
}

std::string footprint_csv_header() {
  return "cut,lr_cut,flash_bytes,n_w_bytes,n_a_bytes,n_g_bytes,n_fi_bytes,n_fw_bytes,new_latents_bytes,"
         "ram_total_bytes";
}

std::string footprint_csv_row(const FootprintReport& r) {
  using csv::number;
  return csv::field(r.cut_name) + ',' + number(r.lr_cut) + ',' + number(r.flash_bytes) + ',' + number(r.ram.n_w) +
         ',' + number(r.ram.n_a) + ',' + number(r.ram.n_g) + ',' + number(r.ram.n_fi) + ',' + number(r.ram.n_fw) +
         ',' + number(r.ram.new_latents) + ',' + number(r.ram_total_bytes);
}

void write_footprint_csv(std::ostream& out, std::span<const FootprintReport> reports) {
  out << footprint_csv_header() << '\n';
  for (const FootprintReport& r : reports) out << footprint_csv_row(r) << '\n';
}

std::vector<FootprintReport> parse_footprint_csv(std::istream& in) {
  std::vector<FootprintReport> reports;
  for (const auto& f : csv::read_table(in, footprint_csv_header())) {
    FootprintReport r;
    r.cut_name = f[0];
    r.lr_cut = csv::parse_size(f[1], "lr_cut");
    r.flash_bytes = csv::parse_size(f[2], "flash_bytes");
    r.ram.n_w = csv::parse_size(f[3], "n_w_bytes");
    r.ram.n_a = csv::parse_size(f[4], "n_a_bytes");
    r.ram.n_g = csv::parse_size(f[5], "n_g_bytes");
    r.ram.n_fi = csv::parse_size(f[6], "n_fi_bytes");
    r.ram.n_fw = csv::parse_size(f[7], "n_fw_bytes");
    r.ram.new_latents = csv::parse_size(f[8], "new_latents_bytes");
    r.ram_total_bytes = csv::parse_size(f[9], "ram_total_bytes");
    if (r.ram_total_bytes != r.ram.total()) throw FormatError("row '" + r.cut_name + "': RAM total does not add up");
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace edgecl::memory
