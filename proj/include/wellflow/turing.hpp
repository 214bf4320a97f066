#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wellflow {

using Rat2 = std::pair<mpq_class, mpq_class>;

// Transition table over states Q and symbols 0..k; the head stays at cell 0
// and the tape shifts underneath it.
struct TuringMachine {
  std::vector<std::string> states;
  int start = 0, halt = 0;  // indices into states
  int k = 1;                // symbols are 0..k
  struct Move {
    int q_next, write, eps;  // eps in {-1, 0, +1}
  };
  std::map<std::pair<int, int>, Move> delta;  // (state, read) -> move

  int n_states() const { return static_cast<int>(states.size()); }
  int state_index(const std::string& name) const;
  void validate() const;  // delta total on (Q \ {halt}) x {0..k}
};

// Two-sided tape, eventually constant on both ends.
class Tape {
 public:
  Tape() = default;
  Tape(std::vector<int> window, long first_index, int left_fill = 0,
       int right_fill = 0);

  int at(long n) const;
  void write(long n, int v);
  // the tape (t_{n-eps}): the cell at index m moves to index m+eps
  Tape shifted(int eps) const;

  long window_first() const { return first_; }
  long window_last() const { return first_ + static_cast<long>(cells_.size()) - 1; }
  int left_fill() const { return left_; }
  int right_fill() const { return right_; }
  int max_symbol() const;

 private:
  std::vector<int> cells_;
  long first_ = 0;
  int left_ = 0, right_ = 0;
};

struct Configuration {
  int q = 0;
  Tape tape;
};

Configuration symbolic_step(const TuringMachine& tm, const Configuration& c);

struct RunResult {
  bool halted = false;
  long steps = 0;
  Configuration final_config;
};

RunResult symbolic_run(const TuringMachine& tm, const Tape& tape,
                       long max_steps);

// the Cantor embedding f: u collects t_1 t_2 ..., v collects t_0 t_{-1} ...
struct TapePoint {
  mpq_class u, v;
};

TapePoint encode_tape(const Tape& tape, int b);

// one application of the shift map on its rectangle pieces:
// phi(alpha, j/b + beta/b) = (j/b + alpha/b, beta)
TapePoint shift_point(const TapePoint& p, int b);
TapePoint unshift_point(const TapePoint& p, int b);

// exact check of f((t_{n-1})) = phi(f((t_n)))
bool shift_check(const Tape& tape, int b);

// Compiled 4-torus diffeomorphism: state squares B_q in the z-factor,
// tape rectangles R_{t0} in the w-factor, affine homotheties in between.
struct CompiledDiffeo {
  TuringMachine tm;
  int b = 10;
  mpq_class square_side;  // B_q side, 1/(2|Q|)
  int subgrid = 1;        // B'_{q,t0} sub-squares per side inside B_{q'}
  struct Square {
    mpq_class x, y, side;  // axis-aligned closed square
    bool contains(const Rat2& z) const;
  };
  std::vector<Square> B;  // per state
  struct Piece {
    int q, t0;          // domain B_q x R_{t0}
    int q_next, write, eps;
    Square image;       // B'_{q,t0} inside B_{q_next}
  };
  std::vector<Piece> pieces;  // |Q \ halt| * (k+1) entries

  Rat2 state_center(int q) const;
  const Piece* piece_at(const Rat2& z, const TapePoint& w) const;
};

CompiledDiffeo compile(const TuringMachine& tm, int b);

struct StepPoint {
  enum class Status { Ok, Halted, OutsidePieces };
  Status status = Status::Ok;
  Rat2 z;
  TapePoint w;
};

// exact image under the compiled map; Halted when z lies in B_halt, and
// OutsidePieces when no piece covers the input (no smooth filler is built)
StepPoint step_point(const CompiledDiffeo& d, const Rat2& z,
                     const TapePoint& w);

// U_{t_{-n}..t_n} = V x W: V is the halt square, W pins the digit window
struct HaltingSet {
  int b = 10;
  long n = 0;
  std::vector<int> window;  // t_{-n} .. t_n, size 2n+1
  bool contains_w(const TapePoint& w) const;
};

HaltingSet halting_set(const std::vector<int>& window, long n, int b);

struct OrbitResult {
  bool entered_U = false;
  long step_index = -1;  // first entry step when entered_U
  bool halted = false;   // reached the halt square
  bool budget_exhausted = false;
  std::vector<std::pair<Rat2, TapePoint>> orbit;
  double min_distance_to_U = 0.0;  // sup-metric distance of z to the V square
};

// iterate from y_s = (center of B_start, f(tape)) and watch for U
OrbitResult run_orbit(const CompiledDiffeo& d, const Tape& tape,
                      long max_steps, const HaltingSet* U = nullptr);

// mapping torus of the compiled map: unit vertical speed, time-1 map = Phi
struct SuspensionFlow {
  const CompiledDiffeo* map = nullptr;
};

SuspensionFlow suspend(const CompiledDiffeo& d);

struct SuspensionPoint {
  StepPoint::Status status = StepPoint::Status::Ok;
  Rat2 z;
  TapePoint w;
  mpq_class s;  // vertical coordinate in [0,1)
};

SuspensionPoint suspension_eval(const SuspensionFlow& flow, const Rat2& z,
                                const TapePoint& w, const mpq_class& s,
                                const mpq_class& t);

}  // namespace wellflow
