#pragma once

#include <vector>

#include "ehlc/lsc.hpp"
#include "ehlc/model.hpp"

namespace ehlc {

// One transmission segment of a frame: objective l * g(E / l) where g maps
// the net drain rate to an expected rate per unit time.
struct Segment {
  enum Kind { LtmLayer, LscBlock } kind = LtmLayer;
  std::size_t frame = 0;
  std::size_t layer = 0;   // LTM layer index
  double q = 1, h = 1;     // LTM tail weight and gain
  const ActiveLayerSet* active = nullptr;

  void eval(const FramePhysics& ph, double x, double& g, double& g1, double& g2) const;
};

// Multi-frame schedule: each frame is an idle phase followed by its segments
// in order. Battery levels are clipped at b_max (surplus is discarded).
struct SegmentProgram {
  std::vector<FramePhysics> frames;
  std::vector<Segment> segments;  // grouped by frame, time ordered
  double b0 = 0;
  double reserve = 0;  // required level at the end of the last frame
};

struct SegmentSolution {
  std::vector<double> l, energy;  // per segment
  double objective = 0;
  bool feasible = false;
  int newton_steps = 0;
};

// Log-barrier interior point method on the (l, E) perspective formulation.
SegmentSolution solve_segment_program(const SegmentProgram& prog, double gap_tol = 1e-10);

// objective of a given (l, E) point
double segment_objective(const SegmentProgram& prog, const std::vector<double>& l,
                         const std::vector<double>& energy);

}  // namespace ehlc
