#pragma once

#include <stdexcept>
#include <string>

namespace epag {

// Error codes cover every failure mode a caller can branch on.
enum class errc {
  self_loop,
  duplicate_edge,
  index_out_of_range,
  feature_shape_mismatch,
  too_many_cycles,
  empty_graph,
  invalid_parameters,
  invalid_mask,
  size_too_large,
  no_features,
  feature_dim_mismatch,
  zero_norm_embedding,
  length_mismatch,
  too_many_items,
  dimension_too_small,
  empty_training_set,
  unexpected_cycle_count,
  empty_pair_set,
  parse_error,
  empty_input,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace epag
