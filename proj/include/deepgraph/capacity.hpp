#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "deepgraph/model.hpp"

namespace deepgraph {

/// n x m matrix whose column j is the uniform distribution over substructure j's nodes.
Matrix pattern_basis(int n, const std::vector<std::vector<int>>& memberships);

/// Attention capacity of hidden states `h` (n x d) for pattern basis `e` (n x m)
/// and value-output map `wvo` (d x d):
///   sqrt(n) * max_{a,b} || row_a(E^T H Wvo) - row_b(E^T H Wvo) ||_2.
/// The objective is convex in every column of the two mixing matrices, so the
/// maximum over the simplex product sits at one-hot vertices.
double attention_capacity(const Matrix& h, const Matrix& e, const Matrix& wvo);

struct HeadwiseValue {
  std::vector<double> per_head;
  double mean = 0.0;
};

/// Capacity at `layer` (0-based; uses that layer's input states and value maps)
/// divided by sum_i ||h_i Wvo||_2 over node tokens. Computed per head.
HeadwiseValue layer_capacity(const ForwardTrace& trace, const Matrix& e, const ModelParams& p, int layer);
HeadwiseValue normalized_capacity(const ForwardTrace& trace, const Matrix& e, const ModelParams& p, int layer);

/// max_{i,j} ||v_i - v_j|| / mean_i ||v_i|| over substructure-token value vectors v = h Wvo.
/// Tokens n..n+m-1 of the trace; requires m >= 2.
HeadwiseValue token_capacity(const ForwardTrace& trace, const ModelParams& p, int layer, int n);

/// Pairwise-difference ratio for explicit token states (rows of `states`).
double token_capacity_of(const Matrix& states, const Matrix& wvo);

/// Contraction coefficient of one simplified attention layer
///   alpha = ||(PH + P A H Wvo) D||_F / ||(PH + A P H Wvo - 1 b^T) D||_F.
double alpha_coefficient(const Matrix& h, const Matrix& a, const Matrix& wvo, const Vector& b, const Matrix& d);

/// lambda = ||(PH + A P H Wvo - 1 b^T) D||_F / ||PH||_F.
double lambda_coefficient(const Matrix& h, const Matrix& a, const Matrix& wvo, const Vector& b, const Matrix& d);

/// gamma = ||D'||_2 (1 + ||W_F1||_2 ||W_F2||_2), spectral norms by power iteration.
double gamma_coefficient(const Matrix& d_prime, const Matrix& w_f1, const Matrix& w_f2);

// ---------------------------------------------------------------------------
// Bound verification on the simplified layer stack
//   H_{i+1} = (H_i + A_i H_i Wvo_i - 1 b_i^T) D_i    [+ FFN block for the two-block variant]

struct StackSpec {
  int max_depth = 8;
  int max_n = 16;
  int max_m = 5;
  int d = 16;  // feature width; raised to n when smaller so H Wvo D can have full row rank
  bool with_ffn = false;
};

struct StackLayerRecord {
  int layer = 0;          // 1-based
  double capacity = 0.0;  // F_{H_l}
  double bound = 0.0;
  double alpha = 0.0;
  double lambda_raw = 0.0;  // before rescaling D to the norm-preserving regime
  double gamma = 1.0;
  bool bound_ok = true;
};

struct StackTrial {
  int n = 0, m = 0, d = 0, depth = 0;
  std::vector<StackLayerRecord> layers;
};

struct BoundReport {
  int theorem = 1;
  std::uint64_t seed = 0;
  int trials = 0;
  int violations = 0;         // layers with capacity > bound
  int alpha_not_below_one = 0;
  double max_ratio = 0.0;     // max capacity / bound
  std::vector<StackTrial> details;

  nlohmann::json to_json(bool include_details = true) const;
};

BoundReport verify_stack_bound(const StackSpec& spec, int trials, std::uint64_t seed);

inline BoundReport verify_theorem1(const StackSpec& spec, int trials, std::uint64_t seed) {
  StackSpec s = spec;
  s.with_ffn = false;
  return verify_stack_bound(s, trials, seed);
}

inline BoundReport verify_theorem2(const StackSpec& spec, int trials, std::uint64_t seed) {
  StackSpec s = spec;
  s.with_ffn = true;
  return verify_stack_bound(s, trials, seed);
}

// ---------------------------------------------------------------------------
// Local vs global attention worst-case contraction

struct LocalGlobalReport {
  int n = 0, m = 0, r_max = 0, d = 0, trials = 0;
  std::uint64_t seed = 0;
  double global_adversarial_alpha = 0.0;  // every node attends one node
  double global_random_min = 0.0;
  double local_min = 0.0;                 // minimum over random local attentions
  double local_constructed_alpha = 0.0;   // one node attended by its whole block
  bool ordering_holds = false;            // local_min > global_adversarial_alpha

  nlohmann::json to_json() const;
};

/// Builds substructure layouts in which every node shares substructures with at
/// most r_max nodes (itself included), draws `trials` random local attentions
/// and compares the smallest alpha found against global attention.
LocalGlobalReport verify_theorem3(int n, int m, int r_max, int d, int trials, std::uint64_t seed);

/// Scale of the value-output map in the constructed adversarial instance.
inline constexpr double kAdversarialValueScale = 10.0;

}  // namespace deepgraph
