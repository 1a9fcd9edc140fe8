/// Exact statevector simulation: Grover search, QFT, phase estimation, and
/// the quantum existence route to the regularity check.
///
/// States live in C^(2^q) with measurement probabilities |z|^2. Grover's
/// operator is U = R_D R_f where R_f negates marked amplitudes and
/// R_D = 2|D><D| - I reflects about the uniform superposition; U rotates the
/// (unmarked, marked) plane by theta = 2 arcsin(sqrt(M/N)).
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qpan/bitset.hpp"
#include "qpan/errors.hpp"
#include "qpan/graph.hpp"
#include "qpan/rng.hpp"

namespace qpan {

inline constexpr int kQubitCap = 22;

using Amplitude = std::complex<double>;

class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(int qubits) : qubits_(qubits) {
    if (qubits < 0 || qubits > kQubitCap) {
      throw GuardError("state of " + std::to_string(qubits) +
                       " qubits exceeds the cap of " +
                       std::to_string(kQubitCap));
    }
    amp_.assign(std::size_t{1} << qubits, Amplitude{0.0, 0.0});
  }

  int qubit_count() const { return qubits_; }
  std::size_t dimension() const { return amp_.size(); }

  Amplitude& operator[](std::size_t i) { return amp_[i]; }
  const Amplitude& operator[](std::size_t i) const { return amp_[i]; }

  std::vector<Amplitude>& amplitudes() { return amp_; }
  const std::vector<Amplitude>& amplitudes() const { return amp_; }

  double norm() const {
    double s = 0.0;
    for (const auto& z : amp_) s += std::norm(z);
    return std::sqrt(s);
  }

  /// Measurement distribution over basis outcomes (Born rule).
  std::vector<double> probabilities() const {
    std::vector<double> p(amp_.size());
    for (std::size_t i = 0; i < amp_.size(); ++i) p[i] = std::norm(amp_[i]);
    return p;
  }

 private:
  int qubits_ = 0;
  std::vector<Amplitude> amp_;
};

/// |D>: every basis state at amplitude 1/sqrt(2^q).
inline StateVector uniform_state(int qubits) {
  StateVector s(qubits);
  double a = 1.0 / std::sqrt(static_cast<double>(s.dimension()));
  for (std::size_t i = 0; i < s.dimension(); ++i) s[i] = a;
  return s;
}

inline StateVector basis_state(int qubits, std::uint64_t index) {
  StateVector s(qubits);
  s[index] = 1.0;
  return s;
}

// ---------------------------------------------------------------------------
// Grover machinery.
// ---------------------------------------------------------------------------

/// Search instance over N = 2^q items with a marked-set oracle. The marked
/// set is materialized once so every oracle application is a bit test.
class GroverInstance {
 public:
  GroverInstance(int qubits, const std::function<bool(std::uint64_t)>& marked)
      : qubits_(qubits), mask_(std::size_t{1} << qubits) {
    if (qubits < 0 || qubits > kQubitCap) {
      throw GuardError("grover instance exceeds qubit cap");
    }
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << qubits); ++x) {
      if (marked(x)) {
        mask_.set(x);
        ++marked_count_;
      }
    }
  }

  int qubit_count() const { return qubits_; }
  std::uint64_t item_count() const { return std::uint64_t{1} << qubits_; }
  std::uint64_t marked_count() const { return marked_count_; }
  bool is_marked(std::uint64_t x) const { return mask_.test(x); }

  /// theta = 2 arcsin(sqrt(M/N)); 0 when nothing is marked.
  double rotation_angle() const {
    double ratio = static_cast<double>(marked_count_) /
                   static_cast<double>(item_count());
    return 2.0 * std::asin(std::sqrt(ratio));
  }

 private:
  int qubits_ = 0;
  DynBitset mask_;
  std::uint64_t marked_count_ = 0;
};

namespace detail {

/// R_f then R_D on a raw amplitude block.
inline void grover_apply(const GroverInstance& inst, std::span<Amplitude> v) {
  Amplitude sum{0.0, 0.0};
  for (std::uint64_t x = 0; x < v.size(); ++x) {
    if (inst.is_marked(x)) v[x] = -v[x];
    sum += v[x];
  }
  Amplitude two_mean = 2.0 * sum / static_cast<double>(v.size());
  for (std::uint64_t x = 0; x < v.size(); ++x) v[x] = two_mean - v[x];
}

/// U^p in closed form: the (unmarked-uniform, marked-uniform) plane rotates
/// by p*theta; the orthogonal residual is fixed by U^2, and odd powers
/// negate its unmarked part. Degenerate M (0 or N) reduces to sign flips.
inline void grover_apply_power(const GroverInstance& inst,
                               std::span<Amplitude> v, std::uint64_t p) {
  std::uint64_t n = v.size();
  std::uint64_t m = inst.marked_count();
  bool odd = (p & 1ULL) != 0;

  if (m == 0 || m == n) {
    // U = R_D (m == 0) or U = -R_D (m == n): the |D> component picks up
    // (-1)^p only when m == n; the residual picks up (-1)^p only when m == 0.
    Amplitude sum{0.0, 0.0};
    for (const auto& z : v) sum += z;
    Amplitude mean = sum / static_cast<double>(n);
    double comp_sign = (m == n) ? (odd ? -1.0 : 1.0) : 1.0;
    double res_sign = (m == 0) ? (odd ? -1.0 : 1.0) : 1.0;
    for (auto& z : v) z = comp_sign * mean + res_sign * (z - mean);
    return;
  }

  double su = 0.0, sui = 0.0, sm = 0.0, smi = 0.0;
  for (std::uint64_t x = 0; x < n; ++x) {
    if (inst.is_marked(x)) {
      sm += v[x].real();
      smi += v[x].imag();
    } else {
      su += v[x].real();
      sui += v[x].imag();
    }
  }
  double ru = std::sqrt(static_cast<double>(n - m));
  double rm = std::sqrt(static_cast<double>(m));
  Amplitude alpha{su / ru, sui / ru};
  Amplitude beta{sm / rm, smi / rm};

  double ang = static_cast<double>(p) * inst.rotation_angle();
  double c = std::cos(ang), s = std::sin(ang);
  Amplitude alpha2 = c * alpha - s * beta;
  Amplitude beta2 = s * alpha + c * beta;

  double res_sign = odd ? -1.0 : 1.0;
  Amplitude base_u = alpha / ru, base_u2 = alpha2 / ru;
  Amplitude base_m = beta / rm, base_m2 = beta2 / rm;
  for (std::uint64_t x = 0; x < n; ++x) {
    if (inst.is_marked(x)) {
      v[x] = base_m2 + (v[x] - base_m);
    } else {
      v[x] = base_u2 + res_sign * (v[x] - base_u);
    }
  }
}

}  // namespace detail

/// One application of U = R_D R_f. Unitary: the norm is preserved.
inline StateVector grover_iterate(const StateVector& s,
                                  const GroverInstance& inst) {
  if (s.qubit_count() != inst.qubit_count()) {
    throw std::invalid_argument("state and instance dimensions differ");
  }
  StateVector out = s;
  detail::grover_apply(inst, std::span<Amplitude>(out.amplitudes()));
  return out;
}

struct GroverSearchResult {
  std::vector<double> probabilities;
  int t_used = 0;
  double p_marked = 0.0;
};

/// Runs t iterates from |D> (default t = floor(pi/4 sqrt(N/M))) and returns
/// the exact measurement distribution.
inline GroverSearchResult grover_search(const GroverInstance& inst,
                                        std::optional<int> t = std::nullopt) {
  int t_used;
  if (t.has_value()) {
    t_used = *t;
    if (t_used < 0) throw std::invalid_argument("negative iteration count");
  } else {
    if (inst.marked_count() == 0) {
      throw std::invalid_argument(
          "grover_search needs M >= 1 unless t is supplied");
    }
    double ratio = static_cast<double>(inst.item_count()) /
                   static_cast<double>(inst.marked_count());
    t_used = static_cast<int>(
        std::floor(std::numbers::pi / 4.0 * std::sqrt(ratio)));
  }
  StateVector s = uniform_state(inst.qubit_count());
  auto span = std::span<Amplitude>(s.amplitudes());
  for (int i = 0; i < t_used; ++i) detail::grover_apply(inst, span);

  GroverSearchResult res;
  res.t_used = t_used;
  res.probabilities = s.probabilities();
  for (std::uint64_t x = 0; x < inst.item_count(); ++x) {
    if (inst.is_marked(x)) res.p_marked += res.probabilities[x];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Quantum Fourier transform. qft maps |a> to (1/sqrt(N)) sum_k
// exp(+2 pi i a k / N)|k>; iqft is the conjugate transform.
// ---------------------------------------------------------------------------

namespace detail {

inline void fft_radix2(std::vector<Amplitude>& a, bool negative_kernel) {
  std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / static_cast<double>(len);
    if (negative_kernel) ang = -ang;
    Amplitude wlen = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      Amplitude w{1.0, 0.0};
      for (std::size_t j = 0; j < len / 2; ++j) {
        // Refresh the twiddle periodically so error does not accumulate.
        if ((j & 0xFF) == 0) {
          w = std::polar(1.0, ang * static_cast<double>(j));
        }
        Amplitude u = a[i + j];
        Amplitude v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

inline StateVector qft(const StateVector& s) {
  StateVector out = s;
  detail::fft_radix2(out.amplitudes(), /*negative_kernel=*/false);
  double scale = 1.0 / std::sqrt(static_cast<double>(out.dimension()));
  for (auto& z : out.amplitudes()) z *= scale;
  return out;
}

inline StateVector iqft(const StateVector& s) {
  StateVector out = s;
  detail::fft_radix2(out.amplitudes(), /*negative_kernel=*/true);
  double scale = 1.0 / std::sqrt(static_cast<double>(out.dimension()));
  for (auto& z : out.amplitudes()) z *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Phase estimation.
// ---------------------------------------------------------------------------

/// A unitary on a fixed number of system qubits. `apply` performs one
/// application on a contiguous system block. `apply_power`, when provided,
/// is a verified shortcut for U^p used behind the fast-path flag; the
/// reported operation count always reflects the sequential ladder.
struct UnitaryHandle {
  int sys_qubits = 0;
  std::function<void(std::span<Amplitude>)> apply;
  std::function<void(std::span<Amplitude>, std::uint64_t)> apply_power;
};

inline UnitaryHandle make_grover_unitary(const GroverInstance& inst) {
  UnitaryHandle u;
  u.sys_qubits = inst.qubit_count();
  u.apply = [&inst](std::span<Amplitude> v) { detail::grover_apply(inst, v); };
  u.apply_power = [&inst](std::span<Amplitude> v, std::uint64_t p) {
    detail::grover_apply_power(inst, v, p);
  };
  return u;
}

/// Single-qubit diag(1, e^{i theta}) on basis |0>, |1>.
inline UnitaryHandle make_phase_unitary(double theta) {
  UnitaryHandle u;
  u.sys_qubits = 1;
  Amplitude w = std::polar(1.0, theta);
  u.apply = [w](std::span<Amplitude> v) { v[1] *= w; };
  u.apply_power = [theta](std::span<Amplitude> v, std::uint64_t p) {
    v[1] *= std::polar(1.0, theta * static_cast<double>(p));
  };
  return u;
}

struct PhaseEstimate {
  int phase_bits = 0;
  std::vector<double> distribution;  // over outcomes a in [0, 2^m)
  std::uint64_t modal = 0;
  double theta_hat = 0.0;            // 2 pi modal / 2^m
  std::uint64_t ops_count = 0;       // controlled-U applications: 2^m - 1
};

/// Textbook circuit: m Hadamarded phase qubits control U^(2^j) ladders on
/// the system register, then the inverse QFT is applied to the phase
/// register and it is read out. The phase register occupies the high bits,
/// so controlled powers act on contiguous system blocks. Each C_U^(2^j) is
/// executed as 2^j counted controlled-U applications; with use_fast_power
/// the block instead receives apply_power(a) once (same count reported).
inline PhaseEstimate phase_estimate(const UnitaryHandle& u,
                                    const StateVector& initial_sys, int m,
                                    bool use_fast_power = false) {
  if (m < 1) throw std::invalid_argument("phase register needs m >= 1 qubits");
  if (initial_sys.qubit_count() != u.sys_qubits) {
    throw std::invalid_argument("initial state does not match the unitary");
  }
  if (m + u.sys_qubits > kQubitCap) {
    throw GuardError("phase estimation register exceeds the qubit cap");
  }
  std::size_t sys_dim = initial_sys.dimension();
  std::uint64_t outcomes = std::uint64_t{1} << m;
  std::vector<Amplitude> amp(outcomes * sys_dim);
  double scale = 1.0 / std::sqrt(static_cast<double>(outcomes));
  for (std::uint64_t a = 0; a < outcomes; ++a) {
    for (std::size_t s = 0; s < sys_dim; ++s) {
      amp[a * sys_dim + s] = initial_sys[s] * scale;
    }
  }

  PhaseEstimate pe;
  pe.phase_bits = m;
  if (use_fast_power && u.apply_power) {
    for (std::uint64_t a = 1; a < outcomes; ++a) {
      u.apply_power(std::span<Amplitude>(&amp[a * sys_dim], sys_dim), a);
    }
    pe.ops_count = outcomes - 1;
  } else {
    for (int j = 0; j < m; ++j) {
      for (std::uint64_t rep = 0; rep < (std::uint64_t{1} << j); ++rep) {
        for (std::uint64_t a = 0; a < outcomes; ++a) {
          if ((a >> j) & 1ULL) {
            u.apply(std::span<Amplitude>(&amp[a * sys_dim], sys_dim));
          }
        }
        ++pe.ops_count;
      }
    }
  }

  // Inverse QFT over the phase axis (stride sys_dim).
  std::vector<Amplitude> col(outcomes);
  double iscale = 1.0 / std::sqrt(static_cast<double>(outcomes));
  for (std::size_t s = 0; s < sys_dim; ++s) {
    for (std::uint64_t a = 0; a < outcomes; ++a) col[a] = amp[a * sys_dim + s];
    detail::fft_radix2(col, /*negative_kernel=*/true);
    for (std::uint64_t a = 0; a < outcomes; ++a) {
      amp[a * sys_dim + s] = col[a] * iscale;
    }
  }

  pe.distribution.assign(outcomes, 0.0);
  for (std::uint64_t a = 0; a < outcomes; ++a) {
    double p = 0.0;
    for (std::size_t s = 0; s < sys_dim; ++s) p += std::norm(amp[a * sys_dim + s]);
    pe.distribution[a] = p;
  }
  pe.modal = static_cast<std::uint64_t>(
      std::max_element(pe.distribution.begin(), pe.distribution.end()) -
      pe.distribution.begin());
  pe.theta_hat = 2.0 * std::numbers::pi * static_cast<double>(pe.modal) /
                 static_cast<double>(outcomes);
  return pe;
}

// ---------------------------------------------------------------------------
// Quantum existence route to the regularity check.
// ---------------------------------------------------------------------------

/// Marks subset pairs with |L(X,Y)| > epsilon * n1 * n2 (strict), encoding
/// X in the low n1 bits and Y in the next n2 bits. Returns the marked set
/// as a bitset plus the marked count.
inline std::pair<DynBitset, std::uint64_t> regularity_marked_set(
    const BipartiteGraph& g, double epsilon) {
  int n1 = g.part_a_size();
  int n2 = g.part_b_size();
  if (n1 + n2 > kBruteForceMaxBits) {
    throw GuardError("regularity oracle exceeds enumeration guard");
  }
  std::uint64_t xn = std::uint64_t{1} << n1;
  std::uint64_t yn = std::uint64_t{1} << n2;
  double nm = static_cast<double>(n1) * static_cast<double>(n2);
  double eab = static_cast<double>(g.edge_count());
  double bound = epsilon * nm;

  DynBitset marked(xn * yn);
  std::uint64_t count = 0;
  std::vector<std::uint32_t> ecount(xn);
  std::vector<int> cnt(std::max(n1, 1));
  for (std::uint64_t ymask = 0; ymask < yn; ++ymask) {
    for (int a = 0; a < n1; ++a) {
      cnt[a] = static_cast<int>(std::popcount(
          g.row(a).words().empty() ? 0ULL : (g.row(a).words()[0] & ymask)));
    }
    double ysize = static_cast<double>(std::popcount(ymask));
    ecount[0] = 0;
    for (std::uint64_t xmask = 0; xmask < xn; ++xmask) {
      if (xmask != 0) {
        ecount[xmask] = ecount[xmask & (xmask - 1)] +
                        static_cast<std::uint32_t>(cnt[std::countr_zero(xmask)]);
      }
      double l = (static_cast<double>(std::popcount(xmask)) * ysize * eab -
                  nm * static_cast<double>(ecount[xmask])) /
                 nm;
      if (std::abs(l) > bound) {
        marked.set(ymask * xn + xmask);
        ++count;
      }
    }
  }
  return {std::move(marked), count};
}

/// M >= 1 keeps P(a=0) comfortably below this at the default register width
/// (sup over all M >= 1 is 3/4, at N=4, M=1); M = 0 gives exactly 1.
inline constexpr double kExistsPZeroThreshold = 0.9;

struct ExistenceReport {
  bool exists = false;
  double m_estimate = 0.0;  // N sin^2(theta_hat / 2); indicative only
  double theta_hat = 0.0;   // folded into [0, pi]
  std::uint64_t ops_count = 0;
  double p_zero = 0.0;
  int phase_bits = 0;
};

/// Phase-estimates the Grover operator whose oracle marks pairs violating
/// the epsilon bound, and decides existence from P(a = 0) of the exact
/// outcome distribution. Default m = ceil((n1+n2)/2), the register width
/// needed to resolve a phase of order 1/sqrt(N).
inline ExistenceReport quantum_exists_regularity(
    const BipartiteGraph& g, double epsilon,
    std::optional<int> phase_bits = std::nullopt,
    bool use_fast_power = false) {
  int n1 = g.part_a_size();
  int n2 = g.part_b_size();
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("empty part");
  int sys = n1 + n2;
  int m = phase_bits.value_or((sys + 1) / 2);
  if (m < 1) throw std::invalid_argument("need at least 1 phase bit");
  if (sys + m > kQubitCap) {
    throw GuardError("existence check exceeds the qubit cap");
  }

  auto [mask, count] = regularity_marked_set(g, epsilon);
  GroverInstance inst(sys, [&mask](std::uint64_t x) { return mask.test(x); });

  PhaseEstimate pe = phase_estimate(make_grover_unitary(inst),
                                    uniform_state(sys), m, use_fast_power);

  ExistenceReport rep;
  rep.phase_bits = m;
  rep.ops_count = pe.ops_count;
  rep.p_zero = pe.distribution[0];
  rep.exists = !(rep.p_zero > kExistsPZeroThreshold);
  double theta = pe.theta_hat;
  if (theta > std::numbers::pi) theta = 2.0 * std::numbers::pi - theta;
  rep.theta_hat = theta;
  rep.m_estimate = static_cast<double>(inst.item_count()) *
                   std::sin(theta / 2.0) * std::sin(theta / 2.0);
  return rep;
}

/// Shot-sampling mode: draws `shots` outcomes from an exact distribution.
inline std::vector<std::uint64_t> sample_distribution(
    const std::vector<double>& distribution, int shots, std::uint64_t seed) {
  Rng rng(seed, "qsim.shots");
  std::vector<std::uint64_t> counts(distribution.size(), 0);
  for (int i = 0; i < shots; ++i) {
    double u = rng.next_double();
    double acc = 0.0;
    std::size_t pick = distribution.size() - 1;
    for (std::size_t a = 0; a < distribution.size(); ++a) {
      acc += distribution[a];
      if (u < acc) {
        pick = a;
        break;
      }
    }
    ++counts[pick];
  }
  return counts;
}

inline void write_distribution_csv(std::ostream& out,
                                   const std::vector<double>& distribution) {
  out << "outcome,probability\n";
  for (std::size_t a = 0; a < distribution.size(); ++a) {
    out << a << "," << distribution[a] << "\n";
  }
}

}  // namespace qpan
