#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "charflow/emptiness.hpp"
#include "charflow/field_system.hpp"
#include "charflow/ideal.hpp"

namespace charflow {

struct ChainOptions {
  GroebnerOptions groebner;
  /// Cap on the number of bracket columns fed to the minors computation.
  std::size_t max_columns = 64;
  std::size_t max_minors = 200000;
  /// Real points sampled per chain step for the set-level stabilization test.
  std::size_t samples_per_step = 12;
  /// Relative tolerance for X_j(p) lying in the kernel of the Jacobian.
  double tol_tangent = 1e-8;
  /// Singular values below sigma_max / rank_gap count as zero.
  double rank_gap = 1e6;
};

/// One step of the iterated characteristic chain. `ideal` carries its raw
/// generators (previous basis plus applied-field polynomials) and its
/// reduced basis.
struct ChainStep {
  std::size_t k = 0;
  Ideal ideal;
  EmptinessStatus status;
  std::size_t generator_count = 0;
  /// Real sample points of the step's variety (empty unless a witness exists).
  std::vector<std::vector<double>> samples;
};

/// Candidate characteristic submanifold N = V(ideal) near `point`.
struct SubmanifoldWitness {
  Ideal ideal;
  std::vector<double> point;
  /// Codimension c of N (rank of the Jacobian of the basis at `point`).
  std::size_t jacobian_rank = 0;
  /// Every X_j g reduces to 0 modulo the ideal, for every basis element g.
  bool tangency_certified = false;
};

enum class VerdictTag { Precompact, NotPrecompact, Unknown };

const char* to_string(VerdictTag tag);

struct Verdict {
  VerdictTag tag = VerdictTag::Unknown;
  /// Precompact: step index whose ideal contains 1.
  std::optional<std::size_t> certified_step;
  /// NotPrecompact: the verified characteristic submanifold.
  std::optional<SubmanifoldWitness> witness;
  std::string reason;
};

struct ChainReport {
  std::size_t s = 1;
  std::size_t dimension = 0;
  std::vector<ChainStep> steps;
  std::optional<std::size_t> stabilized_at;
  Verdict verdict;
  std::vector<std::string> warnings;
  bool budget_exhausted = false;
};

/// Ideal of all n x n minors of the matrix of bracket columns of length <= s;
/// its real variety is the s-step degeneration locus.
Ideal degeneration_ideal(const FieldSystem& sys, std::size_t s, const ChainOptions& options = {});

/// Generated by G and X_j g for g in the reduced basis G of `ideal`. The
/// variety contains the characteristic set of V(ideal).
Ideal char_step(const Ideal& ideal, const FieldSystem& sys);

/// Iterates char_step from the degeneration ideal until a step is certified
/// empty, set-level stabilization is observed, or step n+1 is reached.
ChainReport run_chain(const FieldSystem& sys, std::size_t s, const SearchBox& box, const ChainOptions& options = {});

/// Looks for a point of V(ideal) where the Jacobian of the basis has locally
/// constant rank c >= 1 and every field lies in its kernel, together with an
/// exact tangency certificate.
std::optional<SubmanifoldWitness> verify_witness(const Ideal& ideal, const FieldSystem& sys, const SearchBox& box,
                                                 const ChainOptions& options = {});

Verdict verdict(const ChainReport& report, const std::optional<SubmanifoldWitness>& witness);

struct Analysis {
  ChainReport report;
  std::optional<SubmanifoldWitness> witness;
  /// Human-readable description of the candidate that produced `witness`.
  std::string witness_source;
};

/// run_chain, then witness search on the final chain ideal and on rational
/// points of it where every field vanishes; the report's verdict is final.
Analysis analyze(const FieldSystem& sys, std::size_t s, const SearchBox& box, const ChainOptions& options = {});

enum class Tristate { True, False, Unknown };
const char* to_string(Tristate t);

struct AmanoResult {
  Tristate holds = Tristate::Unknown;
  /// Phi, Y_1 Phi, Y_2 Y_1 Phi, ...
  std::vector<Poly> derivatives;
  EmptinessStatus status;
  std::string comparison;
  /// Chain points checked against the inclusion claim, and how many violated it.
  std::size_t inclusion_checked = 0;
  std::size_t inclusion_violations = 0;
  ChainReport chain;
};

/// Amano's cover condition on the degeneration variety: holds iff no point of
/// V(degeneration ideal) annihilates Phi and all iterated derivatives
/// Y_k...Y_1 Phi (k <= N).
AmanoResult amano_check(const FieldSystem& sys, const Poly& phi, const std::vector<PolyVectorField>& ys,
                        std::size_t s, const SearchBox& box, const ChainOptions& options = {});

}  // namespace charflow
