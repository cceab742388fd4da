#pragma once

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpair {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Three-level atom: c is the ground level, a couples to sigma+ light,
// b couples to sigma- light.
enum class AtomLevel : int { a = 0, b = 1, c = 2 };

constexpr int kNumModes = 4;

// Cavity mode identifier. Flat index order: (1,+), (1,-), (2,+), (2,-).
struct ModeId {
  int cavity = 1;  // 1 or 2
  int pol = +1;    // +1 for sigma+, -1 for sigma-

  int index() const { return 2 * (cavity - 1) + (pol > 0 ? 0 : 1); }
  static ModeId from_index(int k);
  bool operator==(const ModeId&) const = default;
};

std::string to_string(ModeId m);

// One product state: atom level plus per-mode photon occupations.
struct BasisState {
  AtomLevel atom = AtomLevel::c;
  std::array<int, kNumModes> n{0, 0, 0, 0};

  // Conserved excitation numbers. N+ counts sigma+ photons plus an excited
  // |a> atom, N- counts sigma- photons plus |b>.
  int excitation_plus() const {
    return n[0] + n[2] + (atom == AtomLevel::a ? 1 : 0);
  }
  int excitation_minus() const {
    return n[1] + n[3] + (atom == AtomLevel::b ? 1 : 0);
  }
  int total_excitation() const { return excitation_plus() + excitation_minus(); }
  int total_photons() const { return n[0] + n[1] + n[2] + n[3]; }
  int cavity_photons(int cavity) const {
    return cavity == 1 ? n[0] + n[1] : n[2] + n[3];
  }

  bool operator==(const BasisState&) const = default;
  // Lexicographic over (atom, n1+, n1-, n2+, n2-).
  bool operator<(const BasisState& o) const;
};

std::string to_string(const BasisState& s);

// All states with the given conserved numbers, in lexicographic order.
// Throws std::invalid_argument on negative inputs or n_max < N+ + N-.
std::vector<BasisState> enumerate_sector(int n_plus, int n_minus, int n_max);

// Immutable ordered basis. Safe to share across threads.
class FockBasis {
 public:
  explicit FockBasis(std::vector<BasisState> states);

  // The 15-state union of sectors (1,1), (1,0), (0,1), (0,0): everything
  // reachable from the two-photon initial state under coherent evolution
  // and jumps. Sector-major, descending total excitation.
  static std::shared_ptr<const FockBasis> simulation_space(int n_max = 2);

  // Full truncated product space (3 * (n_max+1)^4 states); used by
  // brute-force oracles and ladder-operator tests.
  static std::shared_ptr<const FockBasis> full_space(int n_max);

  int dim() const { return static_cast<int>(states_.size()); }
  const BasisState& state(int i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  // -1 if the state is not part of this basis.
  int index_of(const BasisState& s) const;

 private:
  std::vector<BasisState> states_;
  std::map<BasisState, int> index_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

// Complex amplitudes over an ordered basis. Norm may fall below one under
// non-Hermitian evolution; it never exceeds 1 + 1e-9 for valid states.
class StateVector {
 public:
  explicit StateVector(BasisPtr basis);
  StateVector(BasisPtr basis, Vector amps);

  static StateVector basis_state(BasisPtr basis, const BasisState& s);

  const BasisPtr& basis() const { return basis_; }
  const Vector& amps() const { return amps_; }
  Vector& amps() { return amps_; }
  int dim() const { return static_cast<int>(amps_.size()); }

  double norm() const { return amps_.norm(); }
  double norm2() const { return amps_.squaredNorm(); }
  StateVector normalized() const;

  // <this|other>
  Complex overlap(const StateVector& other) const;

 private:
  BasisPtr basis_;
  Vector amps_;
};

// Ladder action a|n> = sqrt(n)|n-1>, mode-wise and linear. The result lives
// on the same basis; annihilating the vacuum yields the zero vector.
StateVector apply_annihilation(ModeId mode, const StateVector& psi);
// S+ = |c><a|, S- = |c><b|. sign = +1 or -1.
StateVector apply_atomic_lowering(int sign, const StateVector& psi);

// Dense matrices of the same operators on a given basis. Image states that
// fall outside the basis are dropped (they never arise on the simulation or
// full spaces).
Matrix annihilation_matrix(const FockBasis& basis, ModeId mode);
Matrix atomic_lowering_matrix(const FockBasis& basis, int sign);

// The five xi_2 landmark states: initial two-photon state, bright/dark
// superpositions, and the entangled pair states.
enum class NamedState { I, B, D, EPlus, EMinus };

std::string to_string(NamedState s);
StateVector named_state(NamedState which, BasisPtr basis);
std::vector<StateVector> all_named_states(BasisPtr basis);

// Sum of |<phi_k|psi>|^2 over an orthonormal family. Throws
// std::invalid_argument if the family is not orthonormal (tol 1e-9).
double project_population(const StateVector& psi,
                          const std::vector<StateVector>& subspace);

}  // namespace qpair
