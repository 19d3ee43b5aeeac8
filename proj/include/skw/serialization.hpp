#pragma once

#include <iosfwd>
#include <string>

#include "skw/coupling.hpp"
#include "skw/instance.hpp"
#include "skw/partition.hpp"
#include "skw/verification.hpp"

namespace skw {

// Partition tree <-> JSON (levels as sorted point indices + parent links,
// delta, eps). Loading revalidates every level invariant against p_inf.
std::string tree_to_json(const PartitionTree& tree);
PartitionTree tree_from_json(const std::string& text, const DiscreteMeasure& p_inf);

// cmd-level partition artifact: the tree plus a per-level summary block
// (cell count, remainder mass, max diameter).
std::string partition_output_json(const PartitionTree& tree,
                                  const DiscreteMeasure& p_inf);
std::string partition_summary_text(const PartitionTree& tree,
                                   const DiscreteMeasure& p_inf);

// Self-contained coupling plan <-> JSON: space, laws, tree, mixing rule,
// depths, residual weights, diagnostics and instance params. Loading
// validates structure but leaves semantic checks to verification.
std::string plan_to_json(const CouplingPlan& plan, const InstanceParams& params);
CouplingPlan plan_from_json(const std::string& text, InstanceParams* params_out);
std::string plan_summary_text(const CouplingPlan& plan);

std::string report_to_json(const VerificationReport& report);
std::string report_summary_text(const VerificationReport& report);

// CSV streams.
void samples_to_csv(std::ostream& out, const std::vector<CoupledSample>& samples);
void quantile_table_to_csv(std::ostream& out, const QuantileCouplingTable& table);
std::string quantile_summary_text(const QuantileCouplingTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace skw
