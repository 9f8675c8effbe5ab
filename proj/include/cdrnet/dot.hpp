#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "cdrnet/graph.hpp"
#include "cdrnet/pc.hpp"

namespace cdrnet {

/// Graphviz digraph with edge labels showing one-decimal strengths and pen
/// width scaling linearly with strength.
inline std::string export_dot(const Dag& g, const std::vector<std::string>& node_names,
                              const EdgeStrengthMap& strengths = {}) {
    if (static_cast<int>(node_names.size()) != g.n_nodes())
        throw NodeSetMismatch("node name count does not match graph");
    std::ostringstream out;
    out << "digraph cdr {\n";
    out << "  rankdir=TB;\n";
    for (NodeId v = 0; v < g.n_nodes(); ++v)
        out << "  n" << v << " [label=\"" << node_names[static_cast<std::size_t>(v)] << "\"];\n";
    for (const auto& [u, v] : g.edges()) {
        out << "  n" << u << " -> n" << v;
        auto it = strengths.strength.find({u, v});
        if (it != strengths.strength.end()) {
            const double s = round1(it->second);
            std::ostringstream label;
            label.setf(std::ios::fixed);
            label.precision(1);
            label << s;
            out << " [label=\"" << label.str() << "\", penwidth=" << 0.5 + 3.5 * s << "]";
        }
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace cdrnet
