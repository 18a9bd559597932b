#include "titan/synth/generator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "titan/core/hash.hpp"
#include "titan/core/rng.hpp"
#include "titan/core/text.hpp"
#include "titan/data/clip_io.hpp"

namespace titan::synth {

namespace {

using data::ActionVector;
using data::AgentTrack;
using data::AgentType;
using data::AgeGroup;
using data::BBox;
using data::Clip;
using titan::core::Rng;

constexpr double kDt = 1.0 / data::kFps;
constexpr double kSceneMargin = 0.03;    // own motion stops at this border
constexpr double kHardBrakeAlpha = -2.2;
constexpr double kMildBrakeAlpha = -0.45;
constexpr double kSpeedCap = 25.0;

// Cached class indices.
struct Labels {
  int standing, sitting, walking, running, atomic_none;
  int crossing_ped, jaywalking, waiting, along_side, on_road, simple_none;
  int getting_in_4w, complex_none;
  int comm_none, trans_none;
  int motion_stopped, motion_moving, motion_parked, motion_none;
  int trunk_open, trunk_closed, trunk_none;
  int door_open, door_closed, door_none;

  static const Labels& get() {
    static const Labels l = [] {
      const auto& tax = data::Taxonomy::get();
      using S = data::ActionSet;
      Labels v{};
      v.standing = tax.class_index(S::atomic, "standing");
      v.sitting = tax.class_index(S::atomic, "sitting");
      v.walking = tax.class_index(S::atomic, "walking");
      v.running = tax.class_index(S::atomic, "running");
      v.atomic_none = tax.class_index(S::atomic, "none");
      v.crossing_ped = tax.class_index(S::simple_contextual, "crossing_at_pedestrian_crossing");
      v.jaywalking = tax.class_index(S::simple_contextual, "jaywalking");
      v.waiting = tax.class_index(S::simple_contextual, "waiting_to_cross_street");
      v.along_side = tax.class_index(S::simple_contextual, "walking_along_the_side_of_the_road");
      v.on_road = tax.class_index(S::simple_contextual, "walking_on_the_road");
      v.simple_none = tax.class_index(S::simple_contextual, "none");
      v.getting_in_4w = tax.class_index(S::complex_contextual, "getting_in_4_wheel_vehicle");
      v.complex_none = tax.class_index(S::complex_contextual, "none");
      v.comm_none = tax.class_index(S::communicative, "none");
      v.trans_none = tax.class_index(S::transportive, "none");
      v.motion_stopped = tax.class_index(S::motion_status, "stopped");
      v.motion_moving = tax.class_index(S::motion_status, "moving");
      v.motion_parked = tax.class_index(S::motion_status, "parked");
      v.motion_none = tax.class_index(S::motion_status, "none");
      v.trunk_open = tax.class_index(S::trunk_status, "open");
      v.trunk_closed = tax.class_index(S::trunk_status, "closed");
      v.trunk_none = tax.class_index(S::trunk_status, "none");
      v.door_open = tax.class_index(S::door_status, "open");
      v.door_closed = tax.class_index(S::door_status, "closed");
      v.door_none = tax.class_index(S::door_status, "none");
      return v;
    }();
    return l;
  }
};

ActionVector person_action(int atomic, int simple, int complex_c, int comm, int trans) {
  ActionVector a = ActionVector::none_for(AgentType::person);
  a.labels[0] = atomic;
  a.labels[1] = simple;
  a.labels[2] = complex_c;
  a.labels[3] = comm;
  a.labels[4] = trans;
  return a;
}

ActionVector vehicle_action(AgentType type, int motion, int trunk, int door) {
  ActionVector a = ActionVector::none_for(type);
  a.labels[5] = motion;
  if (type == AgentType::vehicle_4wheel) {
    a.labels[6] = trunk;
    a.labels[7] = door;
  }
  return a;
}

struct AgentPlan {
  AgentType type = AgentType::person;
  std::optional<AgeGroup> age;
  MotionModel behavior = MotionModel::stationary;
  double spawn_u = 0.5, spawn_v = 0.5;
  double base_lu = 0.03, base_lv = 0.1;
  int comm_label = 0, trans_label = 0;

  // constant_velocity / curve
  double speed = 0.0, dir_u = 0.0, dir_v = 0.0, turn_rate = 0.0;
  bool runs = false;

  // crossing / wait_then_cross
  int turn_frame = 0;       // first lateral frame
  double pre_dv = 0.0;
  double cross_speed = 0.0;
  int cross_dir = 1;
  int cross_label = 0;

  // approach_vehicle
  int pair_plan = -1;       // index of the paired vehicle plan
  double approach_speed = 0.0;

  // stationary person pose
  int atomic_label = 0;

  // vehicle
  int motion_label = 0;
  int trunk_label = 0;
  int door_label = 0;
};

struct OwnTrace {
  std::vector<double> pos_u, pos_v;   // own-world positions, flow-free
  std::vector<double> vel_u, vel_v;   // vel[t] moves frame t to t+1
  std::vector<ActionVector> labels;
  std::vector<double> pair_dist;      // distance to paired vehicle (approach only)
};

bool crossing_labeled(const ActionVector& a) {
  const auto& L = Labels::get();
  return a.labels[1] == L.crossing_ped || a.labels[1] == L.jaywalking;
}

bool waiting_labeled(const ActionVector& a) {
  return a.labels[1] == Labels::get().waiting;
}

double side_band(Rng& rng, double lo, double hi) {
  const double off = rng.uniform(lo, hi);
  return rng.bernoulli(0.5) ? 0.5 - off : 0.5 + off;
}

std::vector<MotionModel> allowed_behaviors(Regime regime, bool vehicle) {
  using M = MotionModel;
  if (vehicle) {
    if (regime == Regime::action_determined) return {M::stationary};
    return {M::stationary, M::constant_velocity, M::curve};
  }
  switch (regime) {
    case Regime::action_determined:
      return {M::stationary, M::wait_then_cross, M::approach_vehicle, M::crossing};
    case Regime::kinematics_determined:
      return {M::stationary, M::constant_velocity, M::curve};
    case Regime::mixed:
      return {M::stationary, M::constant_velocity, M::crossing, M::wait_then_cross,
              M::approach_vehicle, M::curve};
  }
  return {M::stationary};
}

double behavior_weight(const BehaviorWeights& w, MotionModel m) {
  switch (m) {
    case MotionModel::stationary: return w.stationary;
    case MotionModel::constant_velocity: return w.constant_velocity;
    case MotionModel::crossing: return w.crossing;
    case MotionModel::wait_then_cross: return w.wait_then_cross;
    case MotionModel::approach_vehicle: return w.approach_vehicle;
    case MotionModel::curve: return w.curve;
  }
  return 0.0;
}

MotionModel draw_behavior(Rng& rng, const BehaviorWeights& w,
                          const std::vector<MotionModel>& menu) {
  double total = 0.0;
  for (MotionModel m : menu) total += behavior_weight(w, m);
  if (total <= 0.0) return menu.front();
  double x = rng.uniform(0.0, total);
  for (MotionModel m : menu) {
    x -= behavior_weight(w, m);
    if (x <= 0.0) return m;
  }
  return menu.back();
}

void person_dims(Rng& rng, AgentPlan& p) {
  p.base_lu = rng.uniform(0.018, 0.035);
  p.base_lv = rng.uniform(0.075, 0.14);
}

void vehicle_dims(Rng& rng, AgentPlan& p) {
  if (p.type == AgentType::vehicle_4wheel) {
    p.base_lu = rng.uniform(0.06, 0.16);
    p.base_lv = rng.uniform(0.055, 0.11);
  } else {
    p.base_lu = rng.uniform(0.025, 0.05);
    p.base_lv = rng.uniform(0.055, 0.1);
  }
}

std::optional<AgeGroup> draw_age(Rng& rng) {
  const double x = rng.uniform();
  if (x < 0.15) return AgeGroup::child;
  if (x < 0.85) return AgeGroup::adult;
  return AgeGroup::senior;
}

int draw_comm(Rng& rng) {
  const auto& L = Labels::get();
  const double x = rng.uniform();
  if (x < 0.6) return L.comm_none;
  if (x < 0.75) return 0;  // looking_at_phone
  if (x < 0.88) return 1;  // talking_on_phone
  return 2;                // talking_in_group
}

int draw_trans(Rng& rng) {
  const auto& L = Labels::get();
  const double x = rng.uniform();
  if (x < 0.7) return L.trans_none;
  if (x < 0.85) return 1;  // carrying_with_both_hands
  if (x < 0.93) return 0;  // pushing
  return 2;                // pulling
}

// Appends the plan (and a paired vehicle plan for approach behavior).
void build_plan(Rng& rng, const GeneratorConfig& config, int clip_length,
                std::vector<AgentPlan>& plans) {
  const auto& L = Labels::get();
  AgentPlan p;
  const bool vehicle = rng.bernoulli(config.vehicle_fraction);
  p.type = vehicle ? (rng.bernoulli(0.3) ? AgentType::vehicle_2wheel
                                         : AgentType::vehicle_4wheel)
                   : AgentType::person;
  if (!vehicle) p.age = draw_age(rng);
  p.behavior = draw_behavior(rng, config.weights, allowed_behaviors(config.regime, vehicle));
  p.comm_label = vehicle ? L.comm_none : draw_comm(rng);
  p.trans_label = vehicle ? L.trans_none : draw_trans(rng);
  if (vehicle) vehicle_dims(rng, p); else person_dims(rng, p);

  switch (p.behavior) {
    case MotionModel::stationary: {
      const bool curbside = !vehicle && rng.bernoulli(0.55);
      if (curbside) {
        p.spawn_u = side_band(rng, 0.10, 0.20);
        p.spawn_v = rng.uniform(0.55, 0.75);
      } else {
        p.spawn_u = rng.uniform(0.10, 0.90);
        p.spawn_v = rng.uniform(0.30, 0.85);
      }
      if (vehicle) {
        p.motion_label = rng.bernoulli(0.7) ? L.motion_parked : L.motion_stopped;
        p.trunk_label = rng.bernoulli(0.9) ? L.trunk_closed : L.trunk_open;
        p.door_label = L.door_closed;
      } else {
        // Curbside idlers stay standing so only the label separates them
        // from dwellers about to cross.
        p.atomic_label = curbside || rng.bernoulli(0.8) ? L.standing : L.sitting;
      }
      break;
    }
    case MotionModel::constant_velocity: {
      p.spawn_u = side_band(rng, 0.17, 0.38);
      p.spawn_v = rng.uniform(0.35, 0.80);
      p.runs = !vehicle && rng.bernoulli(0.15);
      p.speed = vehicle ? rng.uniform(0.004, 0.009)
                        : (p.runs ? rng.uniform(0.005, 0.0075)
                                  : rng.uniform(0.002, 0.0045));
      const double lateral = rng.uniform(-0.25, 0.25);
      const double vertical = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double norm = std::sqrt(lateral * lateral + 1.0);
      p.dir_u = lateral / norm;
      p.dir_v = vertical / norm;
      if (vehicle) {
        p.motion_label = L.motion_moving;
        p.trunk_label = L.trunk_closed;
        p.door_label = L.door_closed;
      }
      break;
    }
    case MotionModel::crossing: {
      p.spawn_u = side_band(rng, 0.10, 0.24);
      p.spawn_v = rng.uniform(0.52, 0.80);
      p.pre_dv = rng.uniform(0.0008, 0.002) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      p.turn_frame = 8 + rng.index(std::max(1, clip_length - 26));
      p.cross_speed = rng.uniform(0.0028, 0.005);
      p.cross_dir = p.spawn_u < 0.5 ? 1 : -1;
      p.cross_label = rng.bernoulli(0.7) ? L.crossing_ped : L.jaywalking;
      p.runs = rng.bernoulli(0.1);
      if (p.runs) p.cross_speed *= 1.6;
      break;
    }
    case MotionModel::wait_then_cross: {
      p.spawn_u = side_band(rng, 0.10, 0.20);
      p.spawn_v = rng.uniform(0.55, 0.75);
      p.turn_frame = 12 + rng.index(19);  // dwell length
      p.cross_speed = rng.uniform(0.003, 0.0052);
      p.cross_dir = p.spawn_u < 0.5 ? 1 : -1;
      p.cross_label = rng.bernoulli(0.7) ? L.crossing_ped : L.jaywalking;
      break;
    }
    case MotionModel::approach_vehicle: {
      AgentPlan car;
      car.type = AgentType::vehicle_4wheel;
      car.behavior = MotionModel::stationary;
      car.spawn_u = side_band(rng, 0.15, 0.35);
      car.spawn_v = rng.uniform(0.40, 0.68);
      vehicle_dims(rng, car);
      car.motion_label = L.motion_parked;
      car.trunk_label = L.trunk_closed;
      car.door_label = L.door_closed;
      car.comm_label = L.comm_none;
      car.trans_label = L.trans_none;

      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      p.spawn_u = std::clamp(car.spawn_u + sign * rng.uniform(0.14, 0.30), 0.08, 0.92);
      p.spawn_v = std::clamp(car.spawn_v + (rng.bernoulli(0.5) ? 1.0 : -1.0) *
                                               rng.uniform(0.16, 0.30),
                             0.30, 0.88);
      p.approach_speed = rng.uniform(0.0024, 0.0042);
      p.pair_plan = static_cast<int>(plans.size()) + 1;  // the car, pushed after p
      plans.push_back(p);
      plans.push_back(car);
      return;
    }
    case MotionModel::curve: {
      p.spawn_u = rng.uniform(0.20, 0.80);
      p.spawn_v = rng.uniform(0.35, 0.75);
      p.speed = vehicle ? rng.uniform(0.004, 0.008) : rng.uniform(0.0028, 0.0048);
      const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      p.dir_u = std::cos(theta);
      p.dir_v = std::sin(theta);
      p.turn_rate = rng.uniform(0.025, 0.06) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      if (vehicle) {
        p.motion_label = L.motion_moving;
        p.trunk_label = L.trunk_closed;
        p.door_label = L.door_closed;
      }
      break;
    }
  }
  plans.push_back(p);
}

// Flow-free simulation: own displacement and honest labels per frame.
std::vector<OwnTrace> simulate_own_world(const std::vector<AgentPlan>& plans, int n) {
  const auto& L = Labels::get();
  const int m = static_cast<int>(plans.size());
  std::vector<OwnTrace> traces(m);
  std::vector<bool> stopped(m, false);
  std::vector<int> approach_phase(m, 0);  // 0 walk, 1 head toward, 2 arrived
  std::vector<int> arrived_at(m, -1);
  std::vector<std::array<double, 2>> dir(m);
  for (int i = 0; i < m; ++i) {
    traces[i].pos_u.assign(n, 0.0);
    traces[i].pos_v.assign(n, 0.0);
    traces[i].vel_u.assign(n, 0.0);
    traces[i].vel_v.assign(n, 0.0);
    traces[i].labels.assign(n, ActionVector::none_for(plans[i].type));
    traces[i].pair_dist.assign(n, -1.0);
    traces[i].pos_u[0] = plans[i].spawn_u;
    traces[i].pos_v[0] = plans[i].spawn_v;
    dir[i] = {plans[i].dir_u, plans[i].dir_v};
  }

  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < m; ++i) {
      const AgentPlan& p = plans[i];
      OwnTrace& tr = traces[i];
      const double u = tr.pos_u[t];
      const double v = tr.pos_v[t];
      double du = 0.0, dv = 0.0;
      ActionVector label = ActionVector::none_for(p.type);
      const bool is_vehicle = data::is_vehicle(p.type);
      const int walk_atomic = p.runs ? L.running : L.walking;

      switch (p.behavior) {
        case MotionModel::stationary:
          if (is_vehicle) {
            label = vehicle_action(p.type, p.motion_label, p.trunk_label, p.door_label);
          } else {
            label = person_action(p.atomic_label, L.simple_none, L.complex_none,
                                  p.comm_label, p.trans_label);
          }
          break;
        case MotionModel::constant_velocity: {
          du = p.speed * dir[i][0];
          dv = p.speed * dir[i][1];
          if (is_vehicle) {
            label = vehicle_action(p.type, p.motion_label, p.trunk_label, p.door_label);
          } else {
            const int simple = std::abs(u - 0.5) > 0.24 ? L.along_side : L.on_road;
            label = person_action(walk_atomic, simple, L.complex_none, p.comm_label,
                                  p.trans_label);
          }
          break;
        }
        case MotionModel::crossing:
          if (t < p.turn_frame) {
            dv = p.pre_dv;
            label = person_action(L.walking, L.along_side, L.complex_none,
                                  p.comm_label, p.trans_label);
          } else {
            du = p.cross_dir * p.cross_speed;
            dv = p.pre_dv * 0.3;
            label = person_action(walk_atomic, p.cross_label, L.complex_none,
                                  p.comm_label, p.trans_label);
          }
          break;
        case MotionModel::wait_then_cross:
          if (t < p.turn_frame) {
            label = person_action(L.standing, L.waiting, L.complex_none,
                                  p.comm_label, p.trans_label);
          } else {
            du = p.cross_dir * p.cross_speed;
            label = person_action(L.walking, p.cross_label, L.complex_none,
                                  p.comm_label, p.trans_label);
          }
          break;
        case MotionModel::approach_vehicle: {
          const OwnTrace& car = traces[p.pair_plan];
          const double cu = car.pos_u[t > 0 ? t : 0];
          const double cv = car.pos_v[t > 0 ? t : 0];
          const double dist = std::hypot(cu - u, cv - v);
          tr.pair_dist[t] = dist;
          if (approach_phase[i] == 0 && std::abs(cv - v) < 0.05)
            approach_phase[i] = 1;
          if (approach_phase[i] == 1 && dist < 0.035) {
            approach_phase[i] = 2;
            arrived_at[i] = t;
          }
          if (approach_phase[i] == 0) {
            dv = (cv > v ? 1.0 : -1.0) * p.approach_speed;
            label = person_action(L.walking, L.on_road, L.complex_none,
                                  p.comm_label, p.trans_label);
          } else if (approach_phase[i] == 1) {
            const double inv = 1.0 / std::max(dist, 1e-9);
            du = (cu - u) * inv * p.approach_speed;
            dv = (cv - v) * inv * p.approach_speed;
            const int complex_c = dist < 0.12 ? L.getting_in_4w : L.complex_none;
            label = person_action(L.walking, L.on_road, complex_c, p.comm_label,
                                  p.trans_label);
          } else {
            const int complex_c = t - arrived_at[i] < 6 ? L.getting_in_4w : L.complex_none;
            label = person_action(L.standing, L.simple_none, complex_c,
                                  p.comm_label, p.trans_label);
          }
          break;
        }
        case MotionModel::curve: {
          const double c = std::cos(p.turn_rate), s = std::sin(p.turn_rate);
          if (t > 0) {
            const double ndu = dir[i][0] * c - dir[i][1] * s;
            const double ndv = dir[i][0] * s + dir[i][1] * c;
            dir[i] = {ndu, ndv};
          }
          du = p.speed * dir[i][0];
          dv = p.speed * dir[i][1];
          if (is_vehicle) {
            label = vehicle_action(p.type, p.motion_label, p.trunk_label, p.door_label);
          } else {
            label = person_action(walk_atomic, L.on_road, L.complex_none,
                                  p.comm_label, p.trans_label);
          }
          break;
        }
      }

      // Own motion halts for good at the scene border; labels follow.
      if (!stopped[i] && (du != 0.0 || dv != 0.0)) {
        const double nu = u + du, nv = v + dv;
        if (nu < kSceneMargin || nu > 1.0 - kSceneMargin || nv < kSceneMargin ||
            nv > 1.0 - kSceneMargin)
          stopped[i] = true;
      }
      if (stopped[i]) {
        du = 0.0;
        dv = 0.0;
        if (is_vehicle) {
          label = vehicle_action(p.type, L.motion_stopped, p.trunk_label, p.door_label);
        } else {
          label = person_action(L.standing, L.simple_none, L.complex_none,
                                p.comm_label, p.trans_label);
        }
      }

      tr.vel_u[t] = du;
      tr.vel_v[t] = dv;
      tr.labels[t] = label;
      if (t + 1 < n) {
        tr.pos_u[t + 1] = u + du;
        tr.pos_v[t + 1] = v + dv;
      }
    }

    // Paired parked vehicles open their door while the walker is alongside.
    for (int i = 0; i < m; ++i) {
      const AgentPlan& p = plans[i];
      if (p.behavior != MotionModel::approach_vehicle) continue;
      OwnTrace& car = traces[p.pair_plan];
      if (traces[i].pair_dist[t] >= 0.0 && traces[i].pair_dist[t] < 0.05)
        car.labels[t].labels[7] = L.door_open;
    }
  }
  return traces;
}

struct EgoScript {
  std::vector<double> alpha;
  std::vector<double> omega;
  double speed0 = 0.0;
};

EgoScript script_ego(Rng& rng, const EgoProfile& profile, int n) {
  EgoScript s;
  s.alpha.assign(n, 0.0);
  s.omega.assign(n, 0.0);
  s.speed0 = rng.uniform(profile.speed_min, profile.speed_max);
  const int segments = std::max(1, profile.num_segments);
  const int seg_len = std::max(1, n / segments);
  for (int seg = 0; seg < segments; ++seg) {
    const double a = rng.uniform(profile.alpha_min, profile.alpha_max);
    const double w = rng.uniform(profile.omega_min, profile.omega_max);
    const int lo = seg * seg_len;
    const int hi = seg + 1 == segments ? n : std::min(n, lo + seg_len);
    for (int t = lo; t < hi; ++t) {
      s.alpha[t] = a;
      s.omega[t] = w;
    }
  }
  return s;
}

struct Generated {
  Clip clip;
  std::vector<BehaviorScript> scripts;
};

Generated generate_internal(const GeneratorConfig& config, int index) {
  validate_generator_config(config);
  const int n = config.clip_length;
  Rng clip_rng = Rng(config.seed).fork(static_cast<std::uint64_t>(index) + 1);
  Rng ego_rng = clip_rng.fork(1);
  Rng layout_rng = clip_rng.fork(2);

  const EgoScript ego = script_ego(ego_rng, config.ego, n);

  const int base_agents =
      config.agents_min + layout_rng.index(config.agents_max - config.agents_min + 1);
  std::vector<AgentPlan> plans;
  for (int i = 0; i < base_agents; ++i) {
    Rng arng = clip_rng.fork(100 + i);
    build_plan(arng, config, n, plans);
  }
  const int m = static_cast<int>(plans.size());

  const std::vector<OwnTrace> own = simulate_own_world(plans, n);

  // Per-agent positional jitter, drawn once (independent of the flow loop).
  std::vector<std::vector<std::array<double, 2>>> jitter(m);
  for (int i = 0; i < m; ++i) {
    Rng jrng = clip_rng.fork(200 + i);
    jitter[i].resize(n);
    for (int t = 0; t < n; ++t) {
      jitter[i][t] = {jrng.normal(0.0, config.noise_sigma),
                      jrng.normal(0.0, config.noise_sigma)};
    }
  }

  // Occlusion gaps are fixed up front: the brake rule below must see the
  // held frames exactly as they will be emitted.
  std::vector<std::vector<int>> src_frame(m, std::vector<int>(n));
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < n; ++t) src_frame[i][t] = t;
    Rng orng = clip_rng.fork(300 + i);
    if (!orng.bernoulli(config.occlusion_prob)) continue;
    if (n < 20) continue;
    const int start = 10 + orng.index(n - 17);
    const int len = 3 + orng.index(5);
    for (int t = start; t < std::min(n, start + len); ++t) src_frame[i][t] = start - 1;
  }

  // Brake sets grow monotonically until the emitted clip satisfies the rule.
  std::vector<bool> hard(n, false), mild(n, false);
  std::vector<double> speed(n, 0.0), alpha_emit(n, 0.0), omega_emit(n, 0.0);
  std::vector<std::vector<std::array<double, 2>>> centers(
      m, std::vector<std::array<double, 2>>(n));

  for (int iteration = 0; iteration < 2 * n + 4; ++iteration) {
    double s = ego.speed0;
    for (int t = 0; t < n; ++t) {
      double a = ego.alpha[t];
      if (mild[t]) a = std::min(a, kMildBrakeAlpha);
      if (hard[t]) a = std::min(a, kHardBrakeAlpha);
      alpha_emit[t] = (s <= 0.0 && a < 0.0) ? 0.0 : a;
      omega_emit[t] = s > 0.0 ? ego.omega[t] : 0.0;
      speed[t] = s;
      s = std::clamp(s + a * kDt, 0.0, kSpeedCap);
    }

    for (int i = 0; i < m; ++i) {
      double u = plans[i].spawn_u, v = plans[i].spawn_v;
      for (int t = 0; t < n; ++t) {
        centers[i][t] = {u + jitter[i][t][0], v + jitter[i][t][1]};
        const double flow_u = config.flow.expand_u * speed[t] * (u - 0.5) -
                              config.flow.yaw_shift * omega_emit[t];
        const double flow_v =
            config.flow.expand_v * speed[t] * (v - config.flow.horizon_v);
        u += own[i].vel_u[t] + flow_u;
        v += own[i].vel_v[t] + flow_v;
      }
    }

    if (!config.ego.brake_rule) break;

    bool changed = false;
    for (int t = 0; t < n; ++t) {
      bool want_hard = false, want_mild = false;
      for (int tau = t; tau <= std::min(n - 1, t + kBrakeLookahead); ++tau) {
        for (int i = 0; i < m; ++i) {
          const int src = src_frame[i][tau];
          const auto& c = centers[i][src];
          if (crossing_labeled(own[i].labels[src]) && in_brake_corridor(c[0], c[1]))
            want_hard = true;
          if (waiting_labeled(own[i].labels[src]) && near_brake_corridor(c[0], c[1]))
            want_mild = true;
        }
        if (want_hard && want_mild) break;
      }
      if (want_hard && !hard[t]) { hard[t] = true; changed = true; }
      if (want_mild && !mild[t]) { mild[t] = true; changed = true; }
    }
    if (!changed) break;
  }

  // Box dimensions: camera approach grows boxes, own recession shrinks them.
  Generated out;
  Clip& clip = out.clip;
  char id[32];
  std::snprintf(id, sizeof id, "clip_%04d", index);
  clip.clip_id = id;
  clip.ego.resize(n);
  for (int t = 0; t < n; ++t) clip.ego[t] = {alpha_emit[t], omega_emit[t]};

  for (int i = 0; i < m; ++i) {
    const AgentPlan& p = plans[i];
    AgentTrack track;
    track.track_id = i + 1;
    track.agent_type = p.type;
    track.age_group = p.age;
    track.boxes.resize(n);
    track.actions = own[i].labels;
    track.visibility.assign(n, true);

    double lu = p.base_lu, lv = p.base_lv;
    const double min_lu = data::is_person(p.type) ? 0.010 : 0.020;
    const double min_lv = data::is_person(p.type) ? 0.062 : 0.046;
    for (int t = 0; t < n; ++t) {
      track.boxes[t] = {centers[i][t][0], centers[i][t][1], lu, lv};
      double factor = 1.0 + config.flow.growth * speed[t] + 0.8 * own[i].vel_v[t];
      factor = std::clamp(factor, 0.985, 1.015);
      lu = std::clamp(lu * factor, min_lu, 0.45);
      lv = std::clamp(lv * factor, min_lv, 0.50);
    }
    clip.agents.push_back(std::move(track));
  }

  // Apply the occlusion holds the brake rule already accounted for.
  for (int i = 0; i < m; ++i) {
    AgentTrack& track = clip.agents[i];
    for (int t = 0; t < n; ++t) {
      const int src = src_frame[i][t];
      if (src == t) continue;
      track.boxes[t] = track.boxes[src];
      track.actions[t] = track.actions[src];
      track.visibility[t] = false;
    }
  }

  data::validate_clip(clip);

  for (int i = 0; i < m; ++i) {
    BehaviorScript script;
    script.motion_model = plans[i].behavior;
    script.action_profile = clip.agents[i].actions;
    script.noise_sigma = config.noise_sigma;
    if (plans[i].pair_plan >= 0)
      script.pair_target = clip.agents[plans[i].pair_plan].track_id;
    out.scripts.push_back(std::move(script));
  }
  return out;
}

}  // namespace

namespace {

using nlohmann::json;

[[noreturn]] void unknown_key(const std::string& key, const char* where,
                              const std::vector<std::string>& allowed) {
  std::string msg = "generator config: unknown key \"" + key + "\" in " + where;
  const std::string suggestion = core::closest_match(key, allowed);
  if (!suggestion.empty()) msg += " (did you mean \"" + suggestion + "\"?)";
  throw std::runtime_error(msg);
}

void check_keys(const json& obj, const char* where,
                const std::vector<std::string>& allowed) {
  if (!obj.is_object())
    throw std::runtime_error(std::string("generator config: ") + where +
                             " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      unknown_key(it.key(), where, allowed);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

Regime parse_regime(const std::string& name) {
  if (name == "action_determined") return Regime::action_determined;
  if (name == "kinematics_determined") return Regime::kinematics_determined;
  if (name == "mixed") return Regime::mixed;
  std::string msg = "generator config: unknown regime \"" + name + "\"";
  const std::string suggestion = core::closest_match(
      name, {"action_determined", "kinematics_determined", "mixed"});
  if (!suggestion.empty()) msg += " (did you mean \"" + suggestion + "\"?)";
  throw std::runtime_error(msg);
}

std::string_view regime_name(Regime regime) {
  switch (regime) {
    case Regime::action_determined: return "action_determined";
    case Regime::kinematics_determined: return "kinematics_determined";
    case Regime::mixed: return "mixed";
  }
  return "mixed";
}

}  // namespace

GeneratorConfig parse_generator_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("generator config: ") + e.what());
  }
  check_keys(root, "config",
             {"seed", "num_clips", "clip_length", "agents_min", "agents_max",
              "weights", "regime", "noise_sigma", "occlusion_prob",
              "vehicle_fraction", "ego", "flow"});
  GeneratorConfig c;
  read_field(root, "seed", c.seed);
  read_field(root, "num_clips", c.num_clips);
  read_field(root, "clip_length", c.clip_length);
  read_field(root, "agents_min", c.agents_min);
  read_field(root, "agents_max", c.agents_max);
  read_field(root, "noise_sigma", c.noise_sigma);
  read_field(root, "occlusion_prob", c.occlusion_prob);
  read_field(root, "vehicle_fraction", c.vehicle_fraction);
  if (auto it = root.find("regime"); it != root.end())
    c.regime = parse_regime(it->get<std::string>());
  if (auto it = root.find("weights"); it != root.end()) {
    check_keys(*it, "weights",
               {"stationary", "constant_velocity", "crossing", "wait_then_cross",
                "approach_vehicle", "curve"});
    read_field(*it, "stationary", c.weights.stationary);
    read_field(*it, "constant_velocity", c.weights.constant_velocity);
    read_field(*it, "crossing", c.weights.crossing);
    read_field(*it, "wait_then_cross", c.weights.wait_then_cross);
    read_field(*it, "approach_vehicle", c.weights.approach_vehicle);
    read_field(*it, "curve", c.weights.curve);
  }
  if (auto it = root.find("ego"); it != root.end()) {
    check_keys(*it, "ego",
               {"num_segments", "alpha_min", "alpha_max", "omega_min",
                "omega_max", "speed_min", "speed_max", "brake_rule"});
    read_field(*it, "num_segments", c.ego.num_segments);
    read_field(*it, "alpha_min", c.ego.alpha_min);
    read_field(*it, "alpha_max", c.ego.alpha_max);
    read_field(*it, "omega_min", c.ego.omega_min);
    read_field(*it, "omega_max", c.ego.omega_max);
    read_field(*it, "speed_min", c.ego.speed_min);
    read_field(*it, "speed_max", c.ego.speed_max);
    read_field(*it, "brake_rule", c.ego.brake_rule);
  }
  if (auto it = root.find("flow"); it != root.end()) {
    check_keys(*it, "flow",
               {"expand_u", "expand_v", "yaw_shift", "growth", "horizon_v"});
    read_field(*it, "expand_u", c.flow.expand_u);
    read_field(*it, "expand_v", c.flow.expand_v);
    read_field(*it, "yaw_shift", c.flow.yaw_shift);
    read_field(*it, "growth", c.flow.growth);
    read_field(*it, "horizon_v", c.flow.horizon_v);
  }
  validate_generator_config(c);
  return c;
}

GeneratorConfig load_generator_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open generator config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_generator_config(text);
}

std::string generator_config_to_json(const GeneratorConfig& config) {
  nlohmann::ordered_json j;
  j["seed"] = config.seed;
  j["num_clips"] = config.num_clips;
  j["clip_length"] = config.clip_length;
  j["agents_min"] = config.agents_min;
  j["agents_max"] = config.agents_max;
  j["regime"] = std::string(regime_name(config.regime));
  j["noise_sigma"] = config.noise_sigma;
  j["occlusion_prob"] = config.occlusion_prob;
  j["vehicle_fraction"] = config.vehicle_fraction;
  j["weights"] = {{"stationary", config.weights.stationary},
                  {"constant_velocity", config.weights.constant_velocity},
                  {"crossing", config.weights.crossing},
                  {"wait_then_cross", config.weights.wait_then_cross},
                  {"approach_vehicle", config.weights.approach_vehicle},
                  {"curve", config.weights.curve}};
  j["ego"] = {{"num_segments", config.ego.num_segments},
              {"alpha_min", config.ego.alpha_min},
              {"alpha_max", config.ego.alpha_max},
              {"omega_min", config.ego.omega_min},
              {"omega_max", config.ego.omega_max},
              {"speed_min", config.ego.speed_min},
              {"speed_max", config.ego.speed_max},
              {"brake_rule", config.ego.brake_rule}};
  j["flow"] = {{"expand_u", config.flow.expand_u},
               {"expand_v", config.flow.expand_v},
               {"yaw_shift", config.flow.yaw_shift},
               {"growth", config.flow.growth},
               {"horizon_v", config.flow.horizon_v}};
  return j.dump(2);
}

std::string_view motion_model_name(MotionModel m) {
  switch (m) {
    case MotionModel::stationary: return "stationary";
    case MotionModel::constant_velocity: return "constant_velocity";
    case MotionModel::crossing: return "crossing";
    case MotionModel::wait_then_cross: return "wait_then_cross";
    case MotionModel::approach_vehicle: return "approach_vehicle";
    case MotionModel::curve: return "curve";
  }
  return "stationary";
}

bool in_brake_corridor(double u, double v) {
  return std::abs(u - 0.5) <= 0.13 && v >= 0.5;
}

bool near_brake_corridor(double u, double v) {
  return std::abs(u - 0.5) <= 0.21 && v >= 0.48;
}

void validate_generator_config(const GeneratorConfig& config) {
  if (config.num_clips < 0) throw std::runtime_error("generator config: num_clips must be >= 0");
  if (config.clip_length < data::kWindowSpan)
    throw std::runtime_error("generator config: clip_length must be >= 30");
  if (config.agents_min < 1 || config.agents_max < config.agents_min)
    throw std::runtime_error("generator config: invalid agents range");
  if (config.weights.total() <= 0.0)
    throw std::runtime_error("generator config: behavior weights must sum to > 0");
  if (config.noise_sigma < 0.0)
    throw std::runtime_error("generator config: noise_sigma must be >= 0");
  if (config.occlusion_prob < 0.0 || config.occlusion_prob > 1.0)
    throw std::runtime_error("generator config: occlusion_prob must be in [0,1]");
  if (config.vehicle_fraction < 0.0 || config.vehicle_fraction > 1.0)
    throw std::runtime_error("generator config: vehicle_fraction must be in [0,1]");
  if (config.ego.num_segments < 1)
    throw std::runtime_error("generator config: ego.num_segments must be >= 1");
}

data::Clip generate_clip(const GeneratorConfig& config, int index) {
  return generate_internal(config, index).clip;
}

std::vector<BehaviorScript> clip_scripts(const GeneratorConfig& config, int index) {
  return generate_internal(config, index).scripts;
}

std::array<int, 3> split_sizes(int num_clips) {
  const double n = static_cast<double>(num_clips);
  const double exact[3] = {4.0 * n / 7.0, 2.0 * n / 7.0, n / 7.0};
  std::array<int, 3> sizes{};
  double frac[3];
  int used = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = static_cast<int>(std::floor(exact[i]));
    frac[i] = exact[i] - sizes[i];
    used += sizes[i];
  }
  // Largest remainder; ties resolve train > val > test.
  for (int left = num_clips - used; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (frac[i] > frac[best] + 1e-12) best = i;
    sizes[best] += 1;
    frac[best] = -1.0;
  }
  return sizes;
}

CorpusLayout generate_corpus(const GeneratorConfig& config, const std::string& out_dir) {
  validate_generator_config(config);
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  const std::array<int, 3> sizes = split_sizes(config.num_clips);
  const char* split_names[3] = {"train", "val", "test"};
  for (const char* name : split_names) fs::create_directories(root / name);

  CorpusLayout layout;
  layout.root = root.string();

  nlohmann::ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["seed"] = config.seed;
  manifest["num_clips"] = config.num_clips;
  manifest["config"] = nlohmann::ordered_json::parse(generator_config_to_json(config));
  nlohmann::ordered_json splits;
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  nlohmann::ordered_json fingerprints = nlohmann::ordered_json::object();

  int index = 0;
  for (int s = 0; s < 3; ++s) {
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    for (int k = 0; k < sizes[s]; ++k, ++index) {
      const Clip clip = generate_clip(config, index);
      const fs::path rel = fs::path(split_names[s]) / (clip.clip_id + ".jsonl");
      const fs::path abs = root / rel;
      data::save_clip(clip, abs.string());
      ids.push_back(clip.clip_id);
      files[clip.clip_id] = rel.string();
      fingerprints[clip.clip_id] = core::file_fingerprint(abs.string());
      auto& bucket = s == 0 ? layout.train_ids : s == 1 ? layout.val_ids : layout.test_ids;
      bucket.push_back(clip.clip_id);
    }
    splits[split_names[s]] = std::move(ids);
  }
  manifest["splits"] = std::move(splits);
  manifest["files"] = std::move(files);
  manifest["fingerprints"] = std::move(fingerprints);

  const fs::path manifest_path = root / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + manifest_path.string());
  out << manifest.dump(2) << "\n";
  layout.manifest_path = manifest_path.string();
  return layout;
}

}  // namespace titan::synth
