#include "wellflow/turing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wellflow {

namespace {

using Q = mpq_class;

long floor_q(const Q& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r.get_si();
}

// n-th base-b digit of x in [0,1): d_n with x = sum d_n b^{-n}
int digit(const Q& x, int n, int b) {
  Q y = x;
  long d = 0;
  for (int i = 0; i < n; ++i) {
    y *= b;
    d = floor_q(y);
    y -= d;
  }
  return static_cast<int>(d);
}

}  // namespace

int TuringMachine::state_index(const std::string& name) const {
  for (int i = 0; i < n_states(); ++i)
    if (states[i] == name) return i;
  throw std::invalid_argument("TuringMachine: unknown state " + name);
}

void TuringMachine::validate() const {
  if (states.empty()) throw std::invalid_argument("machine: no states");
  if (start < 0 || start >= n_states() || halt < 0 || halt >= n_states())
    throw std::invalid_argument("machine: start/halt out of range");
  if (k < 1) throw std::invalid_argument("machine: k must be >= 1");
  for (int q = 0; q < n_states(); ++q) {
    for (int t = 0; t <= k; ++t) {
      const auto it = delta.find({q, t});
      if (q == halt) {
        if (it != delta.end())
          throw std::invalid_argument("machine: delta defined on halt state");
        continue;
      }
      if (it == delta.end())
        throw std::invalid_argument("machine: delta not total");
      const auto& m = it->second;
      if (m.q_next < 0 || m.q_next >= n_states() || m.write < 0 ||
          m.write > k || m.eps < -1 || m.eps > 1)
        throw std::invalid_argument("machine: transition out of range");
    }
  }
}

Tape::Tape(std::vector<int> window, long first_index, int left_fill,
           int right_fill)
    : cells_(std::move(window)),
      first_(first_index),
      left_(left_fill),
      right_(right_fill) {}

int Tape::at(long n) const {
  if (n < first_) return left_;
  const long i = n - first_;
  if (i >= static_cast<long>(cells_.size())) return right_;
  return cells_[i];
}

void Tape::write(long n, int v) {
  while (n < first_) {
    cells_.insert(cells_.begin(), left_);
    --first_;
  }
  while (n - first_ >= static_cast<long>(cells_.size()))
    cells_.push_back(right_);
  cells_[n - first_] = v;
}

Tape Tape::shifted(int eps) const {
  Tape t = *this;
  t.first_ += eps;
  return t;
}

int Tape::max_symbol() const {
  int m = std::max(left_, right_);
  for (int v : cells_) m = std::max(m, v);
  return m;
}

Configuration symbolic_step(const TuringMachine& tm, const Configuration& c) {
  if (c.q == tm.halt)
    throw std::invalid_argument("symbolic_step: machine already halted");
  const int t0 = c.tape.at(0);
  const auto it = tm.delta.find({c.q, t0});
  if (it == tm.delta.end())
    throw std::invalid_argument("symbolic_step: missing transition");
  Configuration next;
  next.q = it->second.q_next;
  Tape t = c.tape;
  t.write(0, it->second.write);
  next.tape = t.shifted(it->second.eps);
  return next;
}

RunResult symbolic_run(const TuringMachine& tm, const Tape& tape,
                       long max_steps) {
  RunResult r;
  Configuration c{tm.start, tape};
  for (r.steps = 0; r.steps < max_steps; ++r.steps) {
    if (c.q == tm.halt) {
      r.halted = true;
      break;
    }
    c = symbolic_step(tm, c);
  }
  if (!r.halted && c.q == tm.halt) r.halted = true;  // halted on last step
  r.final_config = c;
  return r;
}

TapePoint encode_tape(const Tape& tape, int b) {
  if (tape.max_symbol() > b - 2)
    throw std::invalid_argument("encode_tape: symbol too large for base");
  TapePoint p;
  const long hi = std::max(tape.window_last(), 0L);
  Q scale(1);
  for (long n = 1; n <= hi; ++n) {
    scale /= b;
    p.u += tape.at(n) * scale;
  }
  // geometric tail: right_fill * b^{-hi} / (b-1)
  p.u += Q(tape.right_fill()) * scale / (b - 1);

  const long lo = std::min(tape.window_first(), 1L);
  scale = 1;
  for (long m = 1; m <= 1 - lo; ++m) {
    scale /= b;
    p.v += tape.at(1 - m) * scale;
  }
  p.v += Q(tape.left_fill()) * scale / (b - 1);
  p.u.canonicalize();
  p.v.canonicalize();
  return p;
}

TapePoint shift_point(const TapePoint& p, int b) {
  const long j = floor_q(b * p.v);
  TapePoint r;
  r.u = Q(j, b) + p.u / b;
  r.v = b * p.v - j;
  r.u.canonicalize();
  r.v.canonicalize();
  return r;
}

TapePoint unshift_point(const TapePoint& p, int b) {
  const long i = floor_q(b * p.u);
  TapePoint r;
  r.u = b * p.u - i;
  r.v = Q(i, b) + p.v / b;
  r.u.canonicalize();
  r.v.canonicalize();
  return r;
}

bool shift_check(const Tape& tape, int b) {
  const int k = std::max(tape.max_symbol(), 1);
  const TapePoint p = encode_tape(tape, b);
  const int t0 = tape.at(0);
  // p must sit in the rectangle R_{t0}
  const Q umax(k, b - 1);
  const Q vwid = Q(k) / (Q(b) * (b - 1));
  if (p.u < 0 || p.u > umax) return false;
  if (p.v < Q(t0, b) || p.v > Q(t0, b) + vwid) return false;
  const TapePoint lhs = encode_tape(tape.shifted(+1), b);
  const TapePoint rhs = shift_point(p, b);
  return lhs.u == rhs.u && lhs.v == rhs.v;
}

bool CompiledDiffeo::Square::contains(const Rat2& z) const {
  return z.first >= x && z.first <= x + side && z.second >= y &&
         z.second <= y + side;
}

Rat2 CompiledDiffeo::state_center(int q) const {
  return {B[q].x + B[q].side / 2, B[q].y + B[q].side / 2};
}

CompiledDiffeo compile(const TuringMachine& tm, int b) {
  tm.validate();
  if (b < 10 * tm.k)
    throw std::invalid_argument("compile: base must satisfy b >= 10k");

  CompiledDiffeo d;
  d.tm = tm;
  d.b = b;
  const int nQ = tm.n_states();
  d.square_side = Q(1, 2L * nQ);
  d.subgrid = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(nQ) * (tm.k + 1))));
  for (int q = 0; q < nQ; ++q)
    d.B.push_back({Q(q, nQ), Q(0), d.square_side});

  const int g = d.subgrid;
  for (int q = 0; q < nQ; ++q) {
    if (q == tm.halt) continue;
    for (int t0 = 0; t0 <= tm.k; ++t0) {
      const auto& m = tm.delta.at({q, t0});
      const int addr = q * (tm.k + 1) + t0;  // source index keeps images apart
      const int cx = addr % g, cy = addr / g;
      CompiledDiffeo::Piece p;
      p.q = q;
      p.t0 = t0;
      p.q_next = m.q_next;
      p.write = m.write;
      p.eps = m.eps;
      const auto& tgt = d.B[m.q_next];
      p.image = {tgt.x + cx * tgt.side / g, tgt.y + cy * tgt.side / g,
                 tgt.side / (2 * g)};
      d.pieces.push_back(p);
    }
  }

  // exact layout guards: rectangles, state squares, piece images
  if (!(Q(tm.k) / (Q(b) * (b - 1)) < Q(1, b)))
    throw std::logic_error("compile: tape rectangles overlap");
  for (size_t i = 0; i < d.pieces.size(); ++i)
    for (size_t j = i + 1; j < d.pieces.size(); ++j) {
      const auto& a = d.pieces[i].image;
      const auto& c = d.pieces[j].image;
      const bool apart = a.x + a.side < c.x || c.x + c.side < a.x ||
                         a.y + a.side < c.y || c.y + c.side < a.y;
      if (!apart) throw std::logic_error("compile: piece images overlap");
    }
  return d;
}

const CompiledDiffeo::Piece* CompiledDiffeo::piece_at(
    const Rat2& z, const TapePoint& w) const {
  const long t0 = floor_q(b * w.v);
  if (t0 < 0 || t0 > tm.k) return nullptr;
  if (w.u < 0 || w.u > Q(tm.k, b - 1)) return nullptr;
  if (w.v - Q(t0, b) > Q(tm.k) / (Q(b) * (b - 1))) return nullptr;
  for (const auto& p : pieces)
    if (p.t0 == t0 && B[p.q].contains(z)) return &p;
  return nullptr;
}

StepPoint step_point(const CompiledDiffeo& d, const Rat2& z,
                     const TapePoint& w) {
  StepPoint out;
  out.z = z;
  out.w = w;
  if (d.B[d.tm.halt].contains(z)) {
    out.status = StepPoint::Status::Halted;
    return out;
  }
  const auto* p = d.piece_at(z, w);
  if (!p) {
    out.status = StepPoint::Status::OutsidePieces;
    return out;
  }
  const auto& src = d.B[p->q];
  const Q ratio = p->image.side / src.side;
  out.z = {p->image.x + (z.first - src.x) * ratio,
           p->image.y + (z.second - src.y) * ratio};
  TapePoint wv = w;
  wv.v += Q(p->write - p->t0, d.b);
  wv.v.canonicalize();
  if (p->eps == 1)
    wv = shift_point(wv, d.b);
  else if (p->eps == -1)
    wv = unshift_point(wv, d.b);
  out.w = wv;
  out.status = StepPoint::Status::Ok;
  return out;
}

bool HaltingSet::contains_w(const TapePoint& w) const {
  for (long m = 1; m <= n; ++m)
    if (digit(w.u, static_cast<int>(m), b) != window[n + m]) return false;
  for (long m = 1; m <= n + 1; ++m)
    if (digit(w.v, static_cast<int>(m), b) != window[n + 1 - m]) return false;
  return true;
}

HaltingSet halting_set(const std::vector<int>& window, long n, int b) {
  if (static_cast<long>(window.size()) != 2 * n + 1)
    throw std::invalid_argument("halting_set: window must be t_{-n}..t_n");
  return {b, n, window};
}

OrbitResult run_orbit(const CompiledDiffeo& d, const Tape& tape,
                      long max_steps, const HaltingSet* U) {
  OrbitResult r;
  Rat2 z = d.state_center(d.tm.start);
  TapePoint w = encode_tape(tape, d.b);
  const auto& V = d.B[d.tm.halt];
  double min_dist = std::numeric_limits<double>::infinity();
  for (long s = 0; s <= max_steps; ++s) {
    r.orbit.emplace_back(z, w);
    const bool in_V = V.contains({z.first, z.second});
    if (!in_V) {
      // sup-metric distance from z to the halt square
      const double px = z.first.get_d(), py = z.second.get_d();
      const double x0 = V.x.get_d(), y0 = V.y.get_d(), sd = V.side.get_d();
      const double dx = std::max({x0 - px, px - (x0 + sd), 0.0});
      const double dy = std::max({y0 - py, py - (y0 + sd), 0.0});
      min_dist = std::min(min_dist, std::max(dx, dy));
    }
    if (in_V && (!U || U->contains_w(w))) {
      r.entered_U = true;
      r.step_index = s;
      r.halted = true;
      return r;
    }
    if (s == max_steps) break;
    const StepPoint next = step_point(d, z, w);
    if (next.status == StepPoint::Status::Halted) {
      r.halted = true;  // in V but outside the digit window
      return r;
    }
    if (next.status == StepPoint::Status::OutsidePieces)
      throw std::runtime_error("run_orbit: orbit left the piece domain");
    z = next.z;
    w = next.w;
  }
  r.budget_exhausted = true;
  r.min_distance_to_U = min_dist;
  return r;
}

SuspensionFlow suspend(const CompiledDiffeo& d) { return {&d}; }

SuspensionPoint suspension_eval(const SuspensionFlow& flow, const Rat2& z,
                                const TapePoint& w, const mpq_class& s,
                                const mpq_class& t) {
  if (t < 0)
    throw std::invalid_argument("suspension_eval: forward time only");
  SuspensionPoint out;
  Q total = s + t;
  const long crossings = floor_q(total);
  out.z = z;
  out.w = w;
  out.s = total - crossings;
  out.s.canonicalize();
  for (long i = 0; i < crossings; ++i) {
    const StepPoint next = step_point(*flow.map, out.z, out.w);
    out.status = next.status;
    if (next.status != StepPoint::Status::Ok) return out;
    out.z = next.z;
    out.w = next.w;
  }
  return out;
}

}  // namespace wellflow
