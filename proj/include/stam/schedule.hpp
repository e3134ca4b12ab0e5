#pragma once

namespace stam {

enum class ScheduleKind {
  kConstant,
  kStepDecay,            // base until switch_epoch, then *= decay every `period` epochs
  kMultiplicativeFloor,  // base until switch_epoch, then v <- max(decay * v, floor)
  kPhaseSwitch,          // base until switch_epoch, then post_value (optionally decaying)
};

// Per-epoch parameter schedule. All four shapes used by the training recipes
// are expressible; evaluation is a closed form of the epoch, so it is total
// and has no per-run state.
struct ParamSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double base = 0.0;
  double decay = 1.0;
  double floor = 0.0;
  double post_value = 0.0;
  int switch_epoch = 0;
  int period = 1;

  static ParamSchedule constant(double value);
  static ParamSchedule step_decay(double base, double decay, int switch_epoch,
                                  int period, double floor = 0.0);
  static ParamSchedule multiplicative_floor(double base, double decay, double floor,
                                            int switch_epoch = 0);
  static ParamSchedule phase_switch(double base, int switch_epoch, double post_value,
                                    double decay = 1.0, double floor = 0.0);

  // Value in effect at `epoch` (>= 0; negative throws).
  double at(int epoch) const;
};

}  // namespace stam
