#pragma once

// JSON encoding of step functions and pairs.
//
//   {"kind": "pair"|"step", "root": node}
//   node := {"left": node, "right": node} | {"phi": x, "psi": y} | {"val": x}
//
// Trees with shared subtrees may additionally carry a top-level "shared"
// array; a node {"ref": i} stands for shared[i].  Entries may only reference
// earlier entries.  Plain trees never emit it.

#include <string>

#include "martweak/dyadic.hpp"

namespace martweak {

struct SerializeOptions {
  /// Emit "shared"/"ref" for subtrees reachable more than once.  When false
  /// the fully expanded tree is written (may be exponentially large).
  bool share_subtrees = true;
  int indent = -1;
};

std::string to_json(const PairTree& p, const SerializeOptions& opt = {});
std::string to_json(const StepFunction& f, const SerializeOptions& opt = {});

PairTree pair_from_json(const std::string& text);
StepFunction step_from_json(const std::string& text);

}  // namespace martweak
