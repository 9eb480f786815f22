#include "edgecl/pareto.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "edgecl/csv.hpp"
#include "edgecl/errors.hpp"

namespace edgecl::harness {

namespace {

double accuracy_key(const ParetoRow& r) {
  return std::isnan(r.accuracy_pct) ? -std::numeric_limits<double>::infinity() : r.accuracy_pct;
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

// Dominance over a subset of axes; all axes are minimised after negating
// accuracy.
template <std::size_t N>
bool dominates_on(const std::array<double, N>& a, const std::array<double, N>& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < N; ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

std::array<double, 3> axes3(const ParetoRow& r) {
  return {static_cast<double>(r.ram_bytes), r.latency_s, -accuracy_key(r)};
}

}  // namespace

bool ParetoRow::operator==(const ParetoRow& o) const {
  return cut == o.cut && lr_cut == o.lr_cut && ram_bytes == o.ram_bytes && flash_bytes == o.flash_bytes &&
         same_double(latency_s, o.latency_s) && same_double(energy_j_per_h, o.energy_j_per_h) &&
         same_double(accuracy_pct, o.accuracy_pct) && accuracy_source == o.accuracy_source &&
         frontier == o.frontier && memory_frontier == o.memory_frontier && latency_frontier == o.latency_frontier;
}

bool dominates(const ParetoRow& a, const ParetoRow& b) { return dominates_on(axes3(a), axes3(b)); }

void mark_frontier(std::span<ParetoRow> rows) {
  for (ParetoRow& r : rows) {
    r.frontier = r.memory_frontier = r.latency_frontier = true;
    for (const ParetoRow& o : rows) {
      if (&o == &r) continue;
      if (dominates(o, r)) r.frontier = false;
      const std::array<double, 2> om{static_cast<double>(o.ram_bytes), -accuracy_key(o)};
      const std::array<double, 2> rm{static_cast<double>(r.ram_bytes), -accuracy_key(r)};
      if (dominates_on(om, rm)) r.memory_frontier = false;
      const std::array<double, 2> ol{o.latency_s, -accuracy_key(o)};
      const std::array<double, 2> rl{r.latency_s, -accuracy_key(r)};
      if (dominates_on(ol, rl)) r.latency_frontier = false;
    }
  }
}

std::vector<ParetoRow> frontier(std::span<const ParetoRow> rows) {
  std::vector<ParetoRow> marked(rows.begin(), rows.end());
  mark_frontier(marked);
  std::vector<ParetoRow> out;
  for (ParetoRow& r : marked) {
    if (r.frontier) out.push_back(std::move(r));
  }
  return out;
}

std::string pareto_csv_header() {
  return "cut,lr_cut,ram_bytes,flash_bytes,latency_s,energy_j_per_h,accuracy_pct,accuracy_source,frontier,"
         "memory_frontier,latency_frontier";
}

void write_pareto_csv(std::ostream& out, std::span<const ParetoRow> rows) {
  out << pareto_csv_header() << '\n';
  for (const ParetoRow& r : rows) {
    out << csv::field(r.cut) << ',' << r.lr_cut << ',' << r.ram_bytes << ',' << r.flash_bytes << ','
        << csv::number(r.latency_s) << ',' << csv::number(r.energy_j_per_h) << ',' << csv::number(r.accuracy_pct)
        << ',' << csv::field(r.accuracy_source) << ',' << r.frontier << ',' << r.memory_frontier << ','
        << r.latency_frontier << '\n';
  }
}

std::vector<ParetoRow> parse_pareto_csv(std::istream& in) {
  std::vector<ParetoRow> rows;
  for (const auto& f : csv::read_table(in, pareto_csv_header())) {
    ParetoRow r;
    r.cut = f[0];
    r.lr_cut = csv::parse_size(f[1], "lr_cut");
    r.ram_bytes = csv::parse_size(f[2], "ram_bytes");
    r.flash_bytes = csv::parse_size(f[3], "flash_bytes");
    r.latency_s = csv::parse_double(f[4], "latency_s");
    r.energy_j_per_h = csv::parse_double(f[5], "energy_j_per_h");
    r.accuracy_pct = csv::parse_double(f[6], "accuracy_pct");
    r.accuracy_source = f[7];
    r.frontier = csv::parse_bool(f[8], "frontier");
    r.memory_frontier = csv::parse_bool(f[9], "memory_frontier");
    r.latency_frontier = csv::parse_bool(f[10], "latency_frontier");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_pareto_plot(std::ostream& out, std::span<const ParetoRow> rows) {
  out << "# ram_mb latency_s accuracy_pct frontier cut\n";
  for (const ParetoRow& r : rows) {
    out << csv::number(static_cast<double>(r.ram_bytes) / 1e6) << ' ' << csv::number(r.latency_s) << ' '
        << csv::number(r.accuracy_pct) << ' ' << r.frontier << ' ' << r.cut << '\n';
  }
}

}  // namespace edgecl::harness
