#include "stam/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stam {

ParamSchedule ParamSchedule::constant(double value) {
  ParamSchedule s;
  s.kind = ScheduleKind::kConstant;
  s.base = value;
  return s;
}

ParamSchedule ParamSchedule::step_decay(double base, double decay, int switch_epoch,
                                        int period, double floor) {
  ParamSchedule s;
  s.kind = ScheduleKind::kStepDecay;
  s.base = base;
  s.decay = decay;
  s.switch_epoch = switch_epoch;
  s.period = std::max(1, period);
  s.floor = floor;
  return s;
}

ParamSchedule ParamSchedule::multiplicative_floor(double base, double decay,
                                                  double floor, int switch_epoch) {
  ParamSchedule s;
  s.kind = ScheduleKind::kMultiplicativeFloor;
  s.base = base;
  s.decay = decay;
  s.floor = floor;
  s.switch_epoch = switch_epoch;
  return s;
}

ParamSchedule ParamSchedule::phase_switch(double base, int switch_epoch,
                                          double post_value, double decay,
                                          double floor) {
  ParamSchedule s;
  s.kind = ScheduleKind::kPhaseSwitch;
  s.base = base;
  s.switch_epoch = switch_epoch;
  s.post_value = post_value;
  s.decay = decay;
  s.floor = floor;
  return s;
}

double ParamSchedule::at(int epoch) const {
  if (epoch < 0) throw std::invalid_argument("ParamSchedule::at: negative epoch");
  switch (kind) {
    case ScheduleKind::kConstant:
      return base;
    case ScheduleKind::kStepDecay: {
      if (epoch < switch_epoch) return base;
      const int k = (epoch - switch_epoch) / period + 1;
      const double v = base * std::pow(decay, k);
      return floor > 0.0 ? std::max(v, floor) : v;
    }
    case ScheduleKind::kMultiplicativeFloor: {
      if (epoch <= switch_epoch) return base;
      // Equivalent to iterating v <- max(decay * v, floor) from base, since
      // the decayed branch is monotone for decay in (0, 1].
      const double v = base * std::pow(decay, epoch - switch_epoch);
      return std::max(v, floor);
    }
    case ScheduleKind::kPhaseSwitch: {
      if (epoch <= switch_epoch) return base;
      const double v = post_value * std::pow(decay, epoch - switch_epoch - 1);
      return floor > 0.0 ? std::max(v, floor) : v;
    }
  }
  throw std::logic_error("ParamSchedule::at: unknown kind");
}

}  // namespace stam
