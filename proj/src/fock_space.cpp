#include "qpair/fock_space.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qpair {

ModeId ModeId::from_index(int k) {
  if (k < 0 || k >= kNumModes) throw std::invalid_argument("mode index out of range");
  return ModeId{k / 2 + 1, (k % 2 == 0) ? +1 : -1};
}

std::string to_string(ModeId m) {
  return "a" + std::to_string(m.cavity) + (m.pol > 0 ? "+" : "-");
}

bool BasisState::operator<(const BasisState& o) const {
  if (atom != o.atom) return static_cast<int>(atom) < static_cast<int>(o.atom);
  return n < o.n;
}

std::string to_string(const BasisState& s) {
  static const char* names[] = {"a", "b", "c"};
  std::ostringstream os;
  os << "|" << names[static_cast<int>(s.atom)] << ";" << s.n[0] << "," << s.n[1]
     << "," << s.n[2] << "," << s.n[3] << ">";
  return os.str();
}

std::vector<BasisState> enumerate_sector(int n_plus, int n_minus, int n_max) {
  if (n_plus < 0 || n_minus < 0 || n_max < 0)
    throw std::invalid_argument("enumerate_sector: negative argument");
  if (n_max < n_plus + n_minus)
    throw std::invalid_argument("enumerate_sector: n_max too small for sector");
  std::vector<BasisState> out;
  for (AtomLevel atom : {AtomLevel::a, AtomLevel::b, AtomLevel::c}) {
    for (int n1p = 0; n1p <= n_max; ++n1p)
      for (int n1m = 0; n1m <= n_max; ++n1m)
        for (int n2p = 0; n2p <= n_max; ++n2p)
          for (int n2m = 0; n2m <= n_max; ++n2m) {
            BasisState s{atom, {n1p, n1m, n2p, n2m}};
            if (s.excitation_plus() == n_plus && s.excitation_minus() == n_minus)
              out.push_back(s);
          }
  }
  // The loop above already emits lexicographic order (atom outermost).
  return out;
}

FockBasis::FockBasis(std::vector<BasisState> states) : states_(std::move(states)) {
  for (int i = 0; i < static_cast<int>(states_.size()); ++i) {
    auto [it, inserted] = index_.emplace(states_[i], i);
    if (!inserted) throw std::invalid_argument("FockBasis: duplicate state");
  }
}

std::shared_ptr<const FockBasis> FockBasis::simulation_space(int n_max) {
  std::vector<BasisState> states;
  // Sector-major: descending total excitation, then descending N+.
  for (auto [np, nm] : {std::pair{1, 1}, {1, 0}, {0, 1}, {0, 0}}) {
    auto sec = enumerate_sector(np, nm, n_max);
    states.insert(states.end(), sec.begin(), sec.end());
  }
  return std::make_shared<FockBasis>(std::move(states));
}

std::shared_ptr<const FockBasis> FockBasis::full_space(int n_max) {
  std::vector<BasisState> states;
  for (AtomLevel atom : {AtomLevel::a, AtomLevel::b, AtomLevel::c})
    for (int n1p = 0; n1p <= n_max; ++n1p)
      for (int n1m = 0; n1m <= n_max; ++n1m)
        for (int n2p = 0; n2p <= n_max; ++n2p)
          for (int n2m = 0; n2m <= n_max; ++n2m)
            states.push_back(BasisState{atom, {n1p, n1m, n2p, n2m}});
  return std::make_shared<FockBasis>(std::move(states));
}

int FockBasis::index_of(const BasisState& s) const {
  auto it = index_.find(s);
  return it == index_.end() ? -1 : it->second;
}

StateVector::StateVector(BasisPtr basis)
    : basis_(std::move(basis)), amps_(Vector::Zero(basis_->dim())) {}

StateVector::StateVector(BasisPtr basis, Vector amps)
    : basis_(std::move(basis)), amps_(std::move(amps)) {
  if (amps_.size() != basis_->dim())
    throw std::invalid_argument("StateVector: amplitude/basis size mismatch");
}

StateVector StateVector::basis_state(BasisPtr basis, const BasisState& s) {
  StateVector psi(std::move(basis));
  int i = psi.basis()->index_of(s);
  if (i < 0) throw std::invalid_argument("basis_state: state not in basis");
  psi.amps()(i) = 1.0;
  return psi;
}

StateVector StateVector::normalized() const {
  double nrm = norm();
  if (nrm == 0.0) throw std::invalid_argument("normalized: zero vector");
  return StateVector(basis_, amps_ / nrm);
}

Complex StateVector::overlap(const StateVector& other) const {
  if (basis_ != other.basis_ && basis_->states() != other.basis_->states())
    throw std::invalid_argument("overlap: mismatched bases");
  return amps_.dot(other.amps_);  // Eigen's dot conjugates the left side
}

StateVector apply_annihilation(ModeId mode, const StateVector& psi) {
  const auto& basis = *psi.basis();
  StateVector out(psi.basis());
  int m = mode.index();
  for (int i = 0; i < basis.dim(); ++i) {
    Complex a = psi.amps()(i);
    if (a == Complex{}) continue;
    const BasisState& s = basis.state(i);
    if (s.n[m] == 0) continue;
    BasisState t = s;
    t.n[m] -= 1;
    int j = basis.index_of(t);
    if (j >= 0) out.amps()(j) += std::sqrt(double(s.n[m])) * a;
  }
  return out;
}

StateVector apply_atomic_lowering(int sign, const StateVector& psi) {
  const auto& basis = *psi.basis();
  StateVector out(psi.basis());
  AtomLevel src = sign > 0 ? AtomLevel::a : AtomLevel::b;
  for (int i = 0; i < basis.dim(); ++i) {
    Complex a = psi.amps()(i);
    if (a == Complex{}) continue;
    const BasisState& s = basis.state(i);
    if (s.atom != src) continue;
    BasisState t = s;
    t.atom = AtomLevel::c;
    int j = basis.index_of(t);
    if (j >= 0) out.amps()(j) += a;
  }
  return out;
}

Matrix annihilation_matrix(const FockBasis& basis, ModeId mode) {
  Matrix M = Matrix::Zero(basis.dim(), basis.dim());
  int m = mode.index();
  for (int i = 0; i < basis.dim(); ++i) {
    const BasisState& s = basis.state(i);
    if (s.n[m] == 0) continue;
    BasisState t = s;
    t.n[m] -= 1;
    int j = basis.index_of(t);
    if (j >= 0) M(j, i) = std::sqrt(double(s.n[m]));
  }
  return M;
}

Matrix atomic_lowering_matrix(const FockBasis& basis, int sign) {
  Matrix M = Matrix::Zero(basis.dim(), basis.dim());
  AtomLevel src = sign > 0 ? AtomLevel::a : AtomLevel::b;
  for (int i = 0; i < basis.dim(); ++i) {
    const BasisState& s = basis.state(i);
    if (s.atom != src) continue;
    BasisState t = s;
    t.atom = AtomLevel::c;
    int j = basis.index_of(t);
    if (j >= 0) M(j, i) = 1.0;
  }
  return M;
}

std::string to_string(NamedState s) {
  switch (s) {
    case NamedState::I: return "I";
    case NamedState::B: return "B";
    case NamedState::D: return "D";
    case NamedState::EPlus: return "E+";
    case NamedState::EMinus: return "E-";
  }
  return "?";
}

StateVector named_state(NamedState which, BasisPtr basis) {
  const double r = 1.0 / std::sqrt(2.0);
  StateVector psi(basis);
  auto set = [&](const BasisState& s, Complex v) {
    int i = basis->index_of(s);
    if (i < 0) throw std::invalid_argument("named_state: state not in basis");
    psi.amps()(i) = v;
  };
  switch (which) {
    case NamedState::I:
      set({AtomLevel::c, {1, 1, 0, 0}}, 1.0);
      break;
    case NamedState::B:
      set({AtomLevel::a, {0, 1, 0, 0}}, r);
      set({AtomLevel::b, {1, 0, 0, 0}}, r);
      break;
    case NamedState::D:
      set({AtomLevel::a, {0, 1, 0, 0}}, r);
      set({AtomLevel::b, {1, 0, 0, 0}}, -r);
      break;
    case NamedState::EPlus:
      set({AtomLevel::c, {0, 1, 1, 0}}, r);
      set({AtomLevel::c, {1, 0, 0, 1}}, r);
      break;
    case NamedState::EMinus:
      set({AtomLevel::c, {0, 1, 1, 0}}, r);
      set({AtomLevel::c, {1, 0, 0, 1}}, -r);
      break;
  }
  return psi;
}

std::vector<StateVector> all_named_states(BasisPtr basis) {
  std::vector<StateVector> out;
  for (NamedState s : {NamedState::I, NamedState::B, NamedState::D,
                       NamedState::EPlus, NamedState::EMinus})
    out.push_back(named_state(s, basis));
  return out;
}

double project_population(const StateVector& psi,
                          const std::vector<StateVector>& subspace) {
  for (size_t k = 0; k < subspace.size(); ++k) {
    for (size_t l = k; l < subspace.size(); ++l) {
      Complex ov = subspace[k].overlap(subspace[l]);
      double expect = (k == l) ? 1.0 : 0.0;
      if (std::abs(ov - expect) > 1e-9)
        throw std::invalid_argument("project_population: subspace not orthonormal");
    }
  }
  double pop = 0.0;
  for (const auto& phi : subspace) pop += std::norm(phi.overlap(psi));
  return pop;
}

}  // namespace qpair
