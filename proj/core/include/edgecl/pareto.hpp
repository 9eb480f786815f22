#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace edgecl::harness {

// One cut of a plan. Accuracy is NaN when neither ingested nor measured;
// `accuracy_source` says which ("ingested", "measured" or "none").
struct ParetoRow {
  std::string cut;
  std::size_t lr_cut = 0;
  std::size_t ram_bytes = 0;
  std::size_t flash_bytes = 0;
  double latency_s = 0.0;
  double energy_j_per_h = 0.0;
  double accuracy_pct = 0.0;
  std::string accuracy_source = "none";
  bool frontier = false;          // (ram, latency, accuracy)
  bool memory_frontier = false;   // (ram, accuracy)
  bool latency_frontier = false;  // (latency, accuracy)

  bool operator==(const ParetoRow& other) const;
};

// a dominates b: no worse on RAM, latency and accuracy, strictly better on
// one. A missing accuracy ranks below any known one.
bool dominates(const ParetoRow& a, const ParetoRow& b);

// Sets the three frontier flags. Depends only on the set of rows.
void mark_frontier(std::span<ParetoRow> rows);

// Rows flagged `frontier`, in input order.
std::vector<ParetoRow> frontier(std::span<const ParetoRow> rows);

std::string pareto_csv_header();
void write_pareto_csv(std::ostream& out, std::span<const ParetoRow> rows);
std::vector<ParetoRow> parse_pareto_csv(std::istream& in);

// gnuplot-ready whitespace table: ram_mb latency_s accuracy frontier cut.
void write_pareto_plot(std::ostream& out, std::span<const ParetoRow> rows);

}  // namespace edgecl::harness
