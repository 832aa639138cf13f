#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "confrepair/config_model.hpp"

namespace confrepair {

// ---------------------------------------------------------------------------
// Installation description.

struct Building {
  int floors = 12;
  int elevators = 3;
  double capacity_kg = 630.0;
  double floor_travel_s = 2.0;   // seconds to traverse one floor
  double door_cycle_s = 4.0;     // full open+close time; each half is door_cycle_s/2
  double board_s = 1.0;          // per-passenger boarding/alighting time

  void validate() const {
    if (floors < 2) throw std::invalid_argument("building: floors must be >= 2");
    if (elevators < 1) throw std::invalid_argument("building: elevators must be >= 1");
    if (!(capacity_kg > 0)) throw std::invalid_argument("building: capacity must be positive");
    if (!(floor_travel_s > 0) || !(door_cycle_s > 0) || !(board_s > 0))
      throw std::invalid_argument("building: all times must be strictly positive");
  }
};

inline Building parse_building(const std::string& text) {
  Building b;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("building line " + std::to_string(lineno) +
                       ": expected '<key> = <value>'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    double d = 0;
    long long ll = 0;
    if (key == "floors" || key == "elevators") {
      if (!detail::parse_ll(val, ll))
        throw ParseError("building line " + std::to_string(lineno) + ": bad integer");
      (key == "floors" ? b.floors : b.elevators) = static_cast<int>(ll);
    } else if (key == "capacity_kg" || key == "floor_travel_s" ||
               key == "door_cycle_s" || key == "board_s") {
      if (!detail::parse_double(val, d))
        throw ParseError("building line " + std::to_string(lineno) + ": bad number");
      if (key == "capacity_kg") b.capacity_kg = d;
      else if (key == "floor_travel_s") b.floor_travel_s = d;
      else if (key == "door_cycle_s") b.door_cycle_s = d;
      else b.board_s = d;
    } else {
      throw ParseError("building line " + std::to_string(lineno) + ": unknown key '" +
                       key + "'");
    }
  }
  b.validate();
  return b;
}

inline std::string serialize_building(const Building& b) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "floors = " << b.floors << "\n"
     << "elevators = " << b.elevators << "\n"
     << "capacity_kg = " << b.capacity_kg << "\n"
     << "floor_travel_s = " << b.floor_travel_s << "\n"
     << "door_cycle_s = " << b.door_cycle_s << "\n"
     << "board_s = " << b.board_s << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Test input: a passenger file.

struct Passenger {
  double arrival_time_s = 0;
  int arrival_floor = 0;
  int destination_floor = 0;
  double weight_kg = 75;
};

struct TestCase {
  std::string id;
  std::vector<Passenger> passengers;  // sorted by arrival time
};

inline constexpr const char* kPassengerCsvHeader =
    "arrival_time_s,arrival_floor,destination_floor,weight_kg";

inline TestCase parse_passenger_file(const std::string& text, std::string id = "") {
  TestCase tc;
  tc.id = std::move(id);
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      std::string squashed;
      for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) squashed.push_back(c);
      if (squashed != kPassengerCsvHeader)
        throw ParseError("passenger file line " + std::to_string(lineno) +
                         ": expected header '" + std::string(kPassengerCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    auto cells = detail::split(line, ',');
    if (cells.size() != 4)
      throw ParseError("passenger file line " + std::to_string(lineno) +
                       ": expected 4 comma-separated fields");
    Passenger p;
    long long fl = 0;
    if (!detail::parse_double(detail::trim(cells[0]), p.arrival_time_s) ||
        p.arrival_time_s < 0)
      throw ParseError("passenger file line " + std::to_string(lineno) +
                       ": bad arrival time");
    if (!detail::parse_ll(detail::trim(cells[1]), fl))
      throw ParseError("passenger file line " + std::to_string(lineno) +
                       ": bad arrival floor");
    p.arrival_floor = static_cast<int>(fl);
    if (!detail::parse_ll(detail::trim(cells[2]), fl))
      throw ParseError("passenger file line " + std::to_string(lineno) +
                       ": bad destination floor");
    p.destination_floor = static_cast<int>(fl);
    if (!detail::parse_double(detail::trim(cells[3]), p.weight_kg) || !(p.weight_kg > 0))
      throw ParseError("passenger file line " + std::to_string(lineno) +
                       ": bad passenger weight");
    if (p.arrival_floor == p.destination_floor)
      throw ParseError("passenger file line " + std::to_string(lineno) +
                       ": arrival floor equals destination floor");
    tc.passengers.push_back(p);
  }
  if (!header_seen) throw ParseError("empty passenger file");
  if (tc.passengers.empty()) throw ParseError("passenger file has no rows");
  std::stable_sort(tc.passengers.begin(), tc.passengers.end(),
                   [](const Passenger& a, const Passenger& b) {
                     return a.arrival_time_s < b.arrival_time_s;
                   });
  return tc;
}

inline std::string serialize_passenger_file(const TestCase& tc) {
  std::ostringstream os;
  os << kPassengerCsvHeader << "\n" << std::setprecision(17);
  for (const auto& p : tc.passengers)
    os << p.arrival_time_s << ',' << p.arrival_floor << ',' << p.destination_floor
       << ',' << p.weight_kg << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Simulation output.

struct PassengerOutcome {
  double waiting_time_s = 0;  // call registration until boarding begins
  double transit_time_s = 0;  // boarding begins until doors open at destination
  bool boarded = false;
  bool completed = false;
};

struct SimResult {
  std::vector<PassengerOutcome> passengers;
  double duration_s = 0;  // time the last passenger reached their destination
  long boardings = 0;
  long alightings = 0;
  double max_onboard_kg = 0;
  bool all_completed = true;

  int completed_count() const {
    int n = 0;
    for (const auto& p : passengers) n += p.completed ? 1 : 0;
    return n;
  }
};

inline std::string sim_result_csv(const SimResult& r) {
  std::ostringstream os;
  os << "passenger,waiting_time_s,transit_time_s,boarded,completed\n"
     << std::setprecision(17);
  for (std::size_t i = 0; i < r.passengers.size(); ++i) {
    const auto& p = r.passengers[i];
    os << i << ',' << p.waiting_time_s << ',' << p.transit_time_s << ','
       << (p.boarded ? 1 : 0) << ',' << (p.completed ? 1 : 0) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Dispatcher configuration. The group controller's behaviour is set by the
// parameters below; the same names form the default ParameterSpace.

enum class AssignLogLevel { Off, Basic, Full };

struct DispatcherConfig {
  double eta_weight = 1.0;
  double load_weight = 2.0;
  double stops_weight = 1.0;
  double distance_weight = 0.5;
  double same_direction_bonus = 10.0;
  double opposite_direction_penalty = 10.0;
  double idle_bonus = 5.0;
  bool zoning_enabled = false;
  double zone_penalty = 30.0;
  bool parking_enabled = false;
  long long parking_floor = 0;
  double park_delay_s = 30.0;
  bool reassign_enabled = false;
  double reassign_margin_s = 15.0;
  double capacity_guard_pct = 80.0;
  double door_dwell_extra_s = 0.0;
  double up_peak_bias = 5.0;
  double eta_stop_penalty_s = 6.0;
  bool tie_break_lowest_load = false;
  AssignLogLevel assign_log_level = AssignLogLevel::Off;

  static DispatcherConfig from_configuration(const Configuration& config) {
    const ParameterSpace& space = config.space();
    auto real_at = [&](const char* name) {
      auto idx = space.index_of(name);
      if (!idx || space.spec(*idx).kind != ParamKind::Real)
        throw std::invalid_argument(std::string("config/space mismatch: missing real parameter '") +
                                    name + "'");
      return std::get<double>(config.value(*idx));
    };
    auto bool_at = [&](const char* name) {
      auto idx = space.index_of(name);
      if (!idx || space.spec(*idx).kind != ParamKind::Boolean)
        throw std::invalid_argument(std::string("config/space mismatch: missing bool parameter '") +
                                    name + "'");
      return std::get<bool>(config.value(*idx));
    };
    auto int_at = [&](const char* name) {
      auto idx = space.index_of(name);
      if (!idx || space.spec(*idx).kind != ParamKind::Integer)
        throw std::invalid_argument(std::string("config/space mismatch: missing int parameter '") +
                                    name + "'");
      return std::get<long long>(config.value(*idx));
    };
    DispatcherConfig d;
    d.eta_weight = real_at("eta_weight");
    d.load_weight = real_at("load_weight");
    d.stops_weight = real_at("stops_weight");
    d.distance_weight = real_at("distance_weight");
    d.same_direction_bonus = real_at("same_direction_bonus");
    d.opposite_direction_penalty = real_at("opposite_direction_penalty");
    d.idle_bonus = real_at("idle_bonus");
    d.zoning_enabled = bool_at("zoning_enabled");
    d.zone_penalty = real_at("zone_penalty");
    d.parking_enabled = bool_at("parking_enabled");
    d.parking_floor = int_at("parking_floor");
    d.park_delay_s = real_at("park_delay_s");
    d.reassign_enabled = bool_at("reassign_enabled");
    d.reassign_margin_s = real_at("reassign_margin_s");
    d.capacity_guard_pct = real_at("capacity_guard_pct");
    d.door_dwell_extra_s = real_at("door_dwell_extra_s");
    d.up_peak_bias = real_at("up_peak_bias");
    d.eta_stop_penalty_s = real_at("eta_stop_penalty_s");
    d.tie_break_lowest_load = bool_at("tie_break_lowest_load");
    auto idx = space.index_of("assign_log_level");
    if (!idx || space.spec(*idx).kind != ParamKind::Enumeration)
      throw std::invalid_argument("config/space mismatch: missing enum parameter 'assign_log_level'");
    const std::string& lvl = std::get<std::string>(config.value(*idx));
    d.assign_log_level = lvl == "off"     ? AssignLogLevel::Off
                         : lvl == "basic" ? AssignLogLevel::Basic
                                          : AssignLogLevel::Full;
    return d;
  }
};

/// The dispatcher's configurable parameter space (20 parameters).
inline ParameterSpacePtr default_dispatcher_space() {
  static const ParameterSpacePtr space = [] {
    std::vector<ParameterSpec> s;
    s.push_back(ParameterSpec::real("eta_weight", 0.0, 10.0,
                                    "cost weight on estimated time of arrival"));
    s.push_back(ParameterSpec::real("load_weight", 0.0, 10.0,
                                    "cost weight on car load ratio"));
    s.push_back(ParameterSpec::real("stops_weight", 0.0, 10.0,
                                    "cost weight on pending stop count"));
    s.push_back(ParameterSpec::real("distance_weight", 0.0, 10.0,
                                    "cost weight on raw floor distance"));
    s.push_back(ParameterSpec::real("same_direction_bonus", 0.0, 50.0,
                                    "discount for calls ahead in the travel direction"));
    s.push_back(ParameterSpec::real("opposite_direction_penalty", 0.0, 50.0,
                                    "surcharge for calls behind a moving car"));
    s.push_back(ParameterSpec::real("idle_bonus", 0.0, 20.0,
                                    "discount for idle cars"));
    s.push_back(ParameterSpec::boolean("zoning_enabled",
                                       "restrict cars to preferred floor zones"));
    s.push_back(ParameterSpec::real("zone_penalty", 0.0, 100.0,
                                    "surcharge for calls outside a car's zone"));
    s.push_back(ParameterSpec::boolean("parking_enabled",
                                       "send idle cars to the parking floor"));
    s.push_back(ParameterSpec::integer("parking_floor", 0, 11,
                                       "floor where idle cars park"));
    s.push_back(ParameterSpec::real("park_delay_s", 1.0, 120.0,
                                    "idle time before a car parks"));
    s.push_back(ParameterSpec::boolean("reassign_enabled",
                                       "allow moving unserved calls between cars"));
    s.push_back(ParameterSpec::real("reassign_margin_s", 0.0, 60.0,
                                    "cost margin required before a call is reassigned"));
    s.push_back(ParameterSpec::real("capacity_guard_pct", 50.0, 100.0,
                                    "load percentage above which a car is avoided"));
    s.push_back(ParameterSpec::real("door_dwell_extra_s", 0.0, 2.0,
                                    "extra door dwell added to every stop"));
    s.push_back(ParameterSpec::real("up_peak_bias", 0.0, 20.0,
                                    "discount for cars near the lobby on lobby calls"));
    s.push_back(ParameterSpec::real("eta_stop_penalty_s", 0.0, 30.0,
                                    "seconds charged per pending stop in the ETA estimate"));
    s.push_back(ParameterSpec::boolean("tie_break_lowest_load",
                                       "nudge cost ties toward the lighter car"));
    s.push_back(ParameterSpec::enumeration("assign_log_level", {"off", "basic", "full"},
                                           "assignment trace verbosity"));
    return std::make_shared<const ParameterSpace>(std::move(s));
  }();
  return space;
}

/// Factory-default dispatcher configuration (sensible values).
inline Configuration default_dispatcher_config() {
  const DispatcherConfig d;
  auto space = default_dispatcher_space();
  std::vector<ParamValue> v;
  v.emplace_back(d.eta_weight);
  v.emplace_back(d.load_weight);
  v.emplace_back(d.stops_weight);
  v.emplace_back(d.distance_weight);
  v.emplace_back(d.same_direction_bonus);
  v.emplace_back(d.opposite_direction_penalty);
  v.emplace_back(d.idle_bonus);
  v.emplace_back(d.zoning_enabled);
  v.emplace_back(d.zone_penalty);
  v.emplace_back(d.parking_enabled);
  v.emplace_back(d.parking_floor);
  v.emplace_back(d.park_delay_s);
  v.emplace_back(d.reassign_enabled);
  v.emplace_back(d.reassign_margin_s);
  v.emplace_back(d.capacity_guard_pct);
  v.emplace_back(d.door_dwell_extra_s);
  v.emplace_back(d.up_peak_bias);
  v.emplace_back(d.eta_stop_penalty_s);
  v.emplace_back(d.tie_break_lowest_load);
  v.emplace_back(std::string("off"));
  return Configuration(space, std::move(v));
}

/// Parameters whose value shifts the timing metrics on essentially every
/// change, and parameters that almost never do. The split is a documented
/// characteristic of this dispatcher, used by the evaluation harness.
inline const std::vector<std::string>& performance_critical_parameters() {
  static const std::vector<std::string> v = {
      "eta_weight", "same_direction_bonus", "door_dwell_extra_s",
      "eta_stop_penalty_s"};
  return v;
}

inline const std::vector<std::string>& near_inert_parameters() {
  static const std::vector<std::string> v = {
      "park_delay_s", "reassign_margin_s", "tie_break_lowest_load",
      "assign_log_level"};
  return v;
}

// ---------------------------------------------------------------------------
// Call assignment.

struct CarSnapshot {
  int floor = 0;
  int direction = 0;  // -1, 0, +1
  double load_kg = 0;
  int pending_stops = 0;
  bool idle = true;
};

struct HallCall {
  int floor = 0;
  int direction = 0;  // +1 up, -1 down
};

namespace detail {
inline int zone_of(int floor, int floors, int cars) {
  const int width = (floors + cars - 1) / cars;
  return std::min(floor / width, cars - 1);
}
}  // namespace detail

/// Assignment cost of serving `call` with car `car_index`; lower is better.
inline double assignment_cost(const CarSnapshot& car, int car_index,
                              const HallCall& call, const DispatcherConfig& cfg,
                              const Building& b) {
  const int dist = std::abs(car.floor - call.floor);
  const double eta = dist * b.floor_travel_s +
                     car.pending_stops * cfg.eta_stop_penalty_s;
  const double load_ratio = car.load_kg / b.capacity_kg;
  double cost = cfg.eta_weight * eta + cfg.load_weight * load_ratio +
                cfg.stops_weight * car.pending_stops +
                cfg.distance_weight * dist;
  const int toward = call.floor == car.floor ? 0
                     : call.floor > car.floor ? 1
                                              : -1;
  if (car.direction != 0 && toward != 0) {
    if (toward == car.direction)
      cost -= cfg.same_direction_bonus;
    else
      cost += cfg.opposite_direction_penalty;
  }
  if (car.idle) cost -= cfg.idle_bonus;
  if (cfg.zoning_enabled &&
      detail::zone_of(call.floor, b.floors, static_cast<int>(b.elevators)) != car_index)
    cost += cfg.zone_penalty;
  if (load_ratio * 100.0 > cfg.capacity_guard_pct) cost += 1000.0;
  if (call.floor == 0)
    cost -= cfg.up_peak_bias *
            (1.0 - static_cast<double>(car.floor) / (b.floors - 1));
  if (cfg.tie_break_lowest_load) cost += 1e-9 * load_ratio;
  return cost;
}

/// Pick the cost-minimizing car for a hall call; ties go to the lowest index.
inline int dispatch_assign(const std::vector<CarSnapshot>& fleet,
                           const HallCall& call, const DispatcherConfig& cfg,
                           const Building& b) {
  if (fleet.empty()) throw std::invalid_argument("dispatch_assign: no elevators");
  int best = 0;
  double best_cost = assignment_cost(fleet[0], 0, call, cfg, b);
  for (std::size_t i = 1; i < fleet.size(); ++i) {
    const double c = assignment_cost(fleet[i], static_cast<int>(i), call, cfg, b);
    if (c < best_cost) {
      best = static_cast<int>(i);
      best_cost = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Discrete-event simulation.

struct SimOptions {
  double drain_s = 1800.0;        // horizon = last arrival + drain_s
  std::ostream* trace = nullptr;  // assignment/stop trace sink (gated by config)
};

namespace detail {

class GroupSimulation {
 public:
  GroupSimulation(const DispatcherConfig& cfg, const TestCase& tc,
                  const Building& b, const SimOptions& opts)
      : cfg_(cfg), tc_(tc), b_(b), opts_(opts) {
    door_half_ = b_.door_cycle_s / 2.0;
    park_floor_ = static_cast<int>(
        std::clamp<long long>(cfg_.parking_floor, 0, b_.floors - 1));
    cars_.resize(static_cast<std::size_t>(b_.elevators));
    pax_.resize(tc_.passengers.size());
    horizon_ = tc_.passengers.empty()
                   ? 0.0
                   : tc_.passengers.back().arrival_time_s + opts_.drain_s;
  }

  SimResult run() {
    for (std::size_t p = 0; p < tc_.passengers.size(); ++p)
      schedule(tc_.passengers[p].arrival_time_s, EventKind::Arrival,
               /*car=*/-1, static_cast<int>(p), 0);
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.t > horizon_) break;
      dispatch_event(ev);
    }
    return finish();
  }

 private:
  enum class EventKind { Arrival, CarStep, DoorsOpen, StopDone, ParkCheck };
  enum class CarPhase { Idle, Moving, Servicing };
  enum class PaxState { Pending, Waiting, Onboard, Served };

  struct Event {
    double t;
    std::uint64_t seq;
    EventKind kind;
    int car;
    int pax;
    int token;
    bool operator>(const Event& o) const {
      if (t != o.t) return t > o.t;
      return seq > o.seq;
    }
  };

  struct Car {
    int floor = 0;
    int dir = 0;
    double load = 0;
    CarPhase phase = CarPhase::Idle;
    bool parking = false;
    int park_token = 0;
    std::vector<int> onboard;
  };

  struct Pax {
    PaxState state = PaxState::Pending;
    int assigned = -1;
    double wait_s = 0;
    double transit_s = 0;
    double transit_start = 0;
    bool boarded = false;
    bool completed = false;
  };

  void schedule(double t, EventKind k, int car, int pax, int token) {
    events_.push(Event{t, seq_++, k, car, pax, token});
  }

  void dispatch_event(const Event& ev) {
    switch (ev.kind) {
      case EventKind::Arrival: on_arrival(ev.pax, ev.t); break;
      case EventKind::CarStep: on_car_step(ev.car, ev.t); break;
      case EventKind::DoorsOpen: on_doors_open(ev.car, ev.t); break;
      case EventKind::StopDone: decide(ev.car, ev.t); break;
      case EventKind::ParkCheck: on_park_check(ev.car, ev.token, ev.t); break;
    }
  }

  std::vector<CarSnapshot> fleet_snapshot() const {
    std::vector<CarSnapshot> fleet(cars_.size());
    for (std::size_t c = 0; c < cars_.size(); ++c) {
      const Car& car = cars_[c];
      fleet[c].floor = car.floor;
      fleet[c].direction = car.dir;
      fleet[c].load_kg = car.load;
      fleet[c].pending_stops = pending_stop_count(static_cast<int>(c));
      fleet[c].idle = car.phase == CarPhase::Idle;
    }
    return fleet;
  }

  int pending_stop_count(int c) const {
    std::vector<int> floors;
    collect_targets(c, floors, /*boardable_only=*/false);
    return static_cast<int>(floors.size());
  }

  /// Distinct target floors for car c: onboard destinations plus floors of
  /// waiting passengers assigned to it. With boardable_only, pickups count
  /// only if at least one waiting passenger would fit right now.
  void collect_targets(int c, std::vector<int>& floors, bool boardable_only) const {
    floors.clear();
    const Car& car = cars_[c];
    auto add = [&](int f) {
      if (std::find(floors.begin(), floors.end(), f) == floors.end())
        floors.push_back(f);
    };
    for (int p : car.onboard) add(tc_.passengers[p].destination_floor);
    for (std::size_t p = 0; p < pax_.size(); ++p) {
      if (pax_[p].state != PaxState::Waiting || pax_[p].assigned != c) continue;
      if (boardable_only &&
          car.load + tc_.passengers[p].weight_kg > b_.capacity_kg)
        continue;
      add(tc_.passengers[p].arrival_floor);
    }
  }

  bool should_stop_here(int c) const {
    const Car& car = cars_[c];
    for (int p : car.onboard)
      if (tc_.passengers[p].destination_floor == car.floor) return true;
    for (std::size_t p = 0; p < pax_.size(); ++p)
      if (pax_[p].state == PaxState::Waiting && pax_[p].assigned == c &&
          tc_.passengers[p].arrival_floor == car.floor &&
          car.load + tc_.passengers[p].weight_kg <= b_.capacity_kg)
        return true;
    return false;
  }

  std::optional<int> choose_target(int c) const {
    std::vector<int> floors;
    collect_targets(c, floors, /*boardable_only=*/true);
    if (floors.empty()) return std::nullopt;
    const Car& car = cars_[c];
    auto nearest = [&](auto pred) -> std::optional<int> {
      std::optional<int> best;
      for (int f : floors) {
        if (!pred(f)) continue;
        if (!best || std::abs(f - car.floor) < std::abs(*best - car.floor) ||
            (std::abs(f - car.floor) == std::abs(*best - car.floor) && f < *best))
          best = f;
      }
      return best;
    };
    if (car.dir > 0)
      if (auto ahead = nearest([&](int f) { return f >= car.floor; })) return ahead;
    if (car.dir < 0)
      if (auto ahead = nearest([&](int f) { return f <= car.floor; })) return ahead;
    return nearest([](int) { return true; });
  }

  /// Central movement decision, entered whenever a car finishes a stop,
  /// crosses a floor without stopping, or is activated from idle.
  void decide(int c, double t) {
    Car& car = cars_[c];
    car.park_token++;  // any decision invalidates a pending park check
    if (should_stop_here(c)) {
      begin_stop(c, t);
      return;
    }
    if (auto target = choose_target(c)) {
      car.parking = false;
      car.dir = *target > car.floor ? 1 : -1;
      car.phase = CarPhase::Moving;
      schedule(t + b_.floor_travel_s, EventKind::CarStep, c, -1, 0);
      return;
    }
    if (cfg_.parking_enabled && car.parking && car.floor != park_floor_) {
      car.dir = park_floor_ > car.floor ? 1 : -1;
      car.phase = CarPhase::Moving;
      schedule(t + b_.floor_travel_s, EventKind::CarStep, c, -1, 0);
      return;
    }
    car.parking = false;
    car.dir = 0;
    car.phase = CarPhase::Idle;
    if (cfg_.parking_enabled && car.floor != park_floor_)
      schedule(t + cfg_.park_delay_s, EventKind::ParkCheck, c, -1, car.park_token);
  }

  void begin_stop(int c, double t) {
    Car& car = cars_[c];
    car.phase = CarPhase::Servicing;
    car.parking = false;
    schedule(t + door_half_, EventKind::DoorsOpen, c, -1, 0);
  }

  void on_doors_open(int c, double t) {
    Car& car = cars_[c];
    int alights = 0;
    for (auto it = car.onboard.begin(); it != car.onboard.end();) {
      const int p = *it;
      if (tc_.passengers[p].destination_floor == car.floor) {
        pax_[p].transit_s = t - pax_[p].transit_start;
        pax_[p].completed = true;
        pax_[p].state = PaxState::Served;
        last_completion_ = std::max(last_completion_, t);
        car.load -= tc_.passengers[p].weight_kg;
        ++alights;
        ++alightings_;
        it = car.onboard.erase(it);
      } else {
        ++it;
      }
    }
    int boards = 0;
    for (std::size_t p = 0; p < pax_.size(); ++p) {
      if (pax_[p].state != PaxState::Waiting || pax_[p].assigned != c) continue;
      const Passenger& info = tc_.passengers[p];
      if (info.arrival_floor != car.floor) continue;
      if (car.load + info.weight_kg > b_.capacity_kg) continue;
      const double board_start = t + (alights + boards) * b_.board_s;
      pax_[p].wait_s = board_start - info.arrival_time_s;
      pax_[p].transit_start = board_start;
      pax_[p].boarded = true;
      pax_[p].state = PaxState::Onboard;
      car.onboard.push_back(static_cast<int>(p));
      car.load += info.weight_kg;
      max_onboard_ = std::max(max_onboard_, car.load);
      ++boards;
      ++boardings_;
    }
    if (opts_.trace && cfg_.assign_log_level == AssignLogLevel::Full)
      *opts_.trace << "t=" << t << " car " << c << " stop floor=" << car.floor
                   << " alight=" << alights << " board=" << boards
                   << " load=" << car.load << "\n";
    const double dwell =
        (alights + boards) * b_.board_s + cfg_.door_dwell_extra_s;
    schedule(t + dwell + door_half_, EventKind::StopDone, c, -1, 0);
  }

  void on_car_step(int c, double t) {
    Car& car = cars_[c];
    car.floor += car.dir;
    decide(c, t);
  }

  void on_park_check(int c, int token, double t) {
    Car& car = cars_[c];
    if (car.phase != CarPhase::Idle || token != car.park_token) return;
    if (!cfg_.parking_enabled || car.floor == park_floor_) return;
    car.parking = true;
    decide(c, t);
  }

  void on_arrival(int p, double t) {
    pax_[p].state = PaxState::Waiting;
    assign(p, t);
    if (cfg_.reassign_enabled) reassign_pass(t);
    wake_idle_cars(t);
  }

  void assign(int p, double t) {
    const Passenger& info = tc_.passengers[p];
    const HallCall call{info.arrival_floor,
                        info.destination_floor > info.arrival_floor ? 1 : -1};
    const int c = dispatch_assign(fleet_snapshot(), call, cfg_, b_);
    pax_[p].assigned = c;
    if (opts_.trace && cfg_.assign_log_level != AssignLogLevel::Off)
      *opts_.trace << "t=" << t << " call floor=" << call.floor
                   << " dir=" << call.direction << " -> car " << c << "\n";
  }

  void reassign_pass(double t) {
    for (std::size_t p = 0; p < pax_.size(); ++p) {
      if (pax_[p].state != PaxState::Waiting) continue;
      const Passenger& info = tc_.passengers[p];
      const HallCall call{info.arrival_floor,
                          info.destination_floor > info.arrival_floor ? 1 : -1};
      const auto fleet = fleet_snapshot();
      const int cur = pax_[p].assigned;
      const double cur_cost = assignment_cost(fleet[cur], cur, call, cfg_, b_);
      const int best = dispatch_assign(fleet, call, cfg_, b_);
      const double best_cost = assignment_cost(fleet[best], best, call, cfg_, b_);
      if (best != cur && best_cost + cfg_.reassign_margin_s < cur_cost) {
        pax_[p].assigned = best;
        if (opts_.trace && cfg_.assign_log_level == AssignLogLevel::Full)
          *opts_.trace << "t=" << t << " reassign pax " << p << " car " << cur
                       << " -> " << best << "\n";
      }
    }
  }

  void wake_idle_cars(double t) {
    for (std::size_t c = 0; c < cars_.size(); ++c) {
      if (cars_[c].phase != CarPhase::Idle) continue;
      std::vector<int> floors;
      collect_targets(static_cast<int>(c), floors, /*boardable_only=*/true);
      if (!floors.empty()) decide(static_cast<int>(c), t);
    }
  }

  SimResult finish() {
    SimResult r;
    r.passengers.resize(pax_.size());
    for (std::size_t p = 0; p < pax_.size(); ++p) {
      const Pax& px = pax_[p];
      PassengerOutcome& out = r.passengers[p];
      out.boarded = px.boarded;
      out.completed = px.completed;
      if (px.completed) {
        out.waiting_time_s = px.wait_s;
        out.transit_time_s = px.transit_s;
      } else if (px.boarded) {
        out.waiting_time_s = px.wait_s;
        out.transit_time_s = horizon_ - px.transit_start;
        r.all_completed = false;
      } else {
        // Never boarded: waiting time truncated at the horizon.
        out.waiting_time_s = horizon_ - tc_.passengers[p].arrival_time_s;
        out.transit_time_s = 0;
        r.all_completed = false;
      }
    }
    r.duration_s = r.all_completed ? last_completion_ : horizon_;
    r.boardings = boardings_;
    r.alightings = alightings_;
    r.max_onboard_kg = max_onboard_;
    return r;
  }

  const DispatcherConfig& cfg_;
  const TestCase& tc_;
  const Building& b_;
  const SimOptions& opts_;
  double door_half_ = 2.0;
  int park_floor_ = 0;
  double horizon_ = 0;
  double last_completion_ = 0;
  double max_onboard_ = 0;
  long boardings_ = 0;
  long alightings_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<Car> cars_;
  std::vector<Pax> pax_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
};

}  // namespace detail

/// Execute one test case under one configuration. The simulation itself is
/// fully deterministic; the seed parameter is part of the interface for
/// stochastic extensions and does not influence this simulator.
inline SimResult simulate(const Configuration& config, const TestCase& tc,
                          const Building& building, std::uint64_t /*seed*/ = 0,
                          const SimOptions& opts = {}) {
  building.validate();
  const DispatcherConfig cfg = DispatcherConfig::from_configuration(config);
  double prev = 0;
  for (const auto& p : tc.passengers) {
    if (p.arrival_floor < 0 || p.arrival_floor >= building.floors ||
        p.destination_floor < 0 || p.destination_floor >= building.floors)
      throw std::invalid_argument("test case '" + tc.id +
                                  "': passenger floor outside the building");
    if (p.arrival_floor == p.destination_floor)
      throw std::invalid_argument("test case '" + tc.id +
                                  "': arrival floor equals destination floor");
    if (p.arrival_time_s < prev)
      throw std::invalid_argument("test case '" + tc.id +
                                  "': passengers not sorted by arrival time");
    prev = p.arrival_time_s;
  }
  detail::GroupSimulation sim(cfg, tc, building, opts);
  return sim.run();
}

}  // namespace confrepair
