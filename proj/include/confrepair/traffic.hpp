#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "confrepair/elevator_sim.hpp"
#include "confrepair/rng.hpp"

namespace confrepair::traffic {

/// Synthetic passenger-flow templates used to build test inputs. Arrival
/// times are uniform over the window; weights are uniform in [55, 100] kg.

namespace detail {

inline Passenger make_passenger(double t, int from, int to, Rng& rng) {
  Passenger p;
  p.arrival_time_s = t;
  p.arrival_floor = from;
  p.destination_floor = to;
  p.weight_kg = rng.uniform_real(55.0, 100.0);
  return p;
}

inline void finalize(TestCase& tc) {
  std::stable_sort(tc.passengers.begin(), tc.passengers.end(),
                   [](const Passenger& a, const Passenger& b) {
                     return a.arrival_time_s < b.arrival_time_s;
                   });
}

}  // namespace detail

/// Morning rush: everyone enters at the lobby and travels up.
inline TestCase up_peak(std::string id, int count, double start_s, double duration_s,
                        int floors, Rng& rng) {
  TestCase tc;
  tc.id = std::move(id);
  for (int i = 0; i < count; ++i) {
    const double t = start_s + rng.uniform01() * duration_s;
    const int dest = static_cast<int>(rng.uniform_int(1, floors - 1));
    tc.passengers.push_back(detail::make_passenger(t, 0, dest, rng));
  }
  detail::finalize(tc);
  return tc;
}

/// Evening rush: upper floors drain toward the lobby.
inline TestCase down_peak(std::string id, int count, double start_s,
                          double duration_s, int floors, Rng& rng) {
  TestCase tc;
  tc.id = std::move(id);
  for (int i = 0; i < count; ++i) {
    const double t = start_s + rng.uniform01() * duration_s;
    const int from = static_cast<int>(rng.uniform_int(1, floors - 1));
    tc.passengers.push_back(detail::make_passenger(t, from, 0, rng));
  }
  detail::finalize(tc);
  return tc;
}

/// Uniform inter-floor traffic between distinct random floors.
inline TestCase inter_floor(std::string id, int count, double start_s,
                            double duration_s, int floors, Rng& rng) {
  TestCase tc;
  tc.id = std::move(id);
  for (int i = 0; i < count; ++i) {
    const double t = start_s + rng.uniform01() * duration_s;
    const int from = static_cast<int>(rng.uniform_int(0, floors - 1));
    int to = from;
    while (to == from) to = static_cast<int>(rng.uniform_int(0, floors - 1));
    tc.passengers.push_back(detail::make_passenger(t, from, to, rng));
  }
  detail::finalize(tc);
  return tc;
}

/// Lunchtime-style mixture: up-peak, down-peak and inter-floor shares.
inline TestCase mixed(std::string id, int count, double start_s, double duration_s,
                      int floors, double up_share, double down_share, Rng& rng) {
  TestCase tc;
  tc.id = std::move(id);
  for (int i = 0; i < count; ++i) {
    const double t = start_s + rng.uniform01() * duration_s;
    const double u = rng.uniform01();
    int from, to;
    if (u < up_share) {
      from = 0;
      to = static_cast<int>(rng.uniform_int(1, floors - 1));
    } else if (u < up_share + down_share) {
      from = static_cast<int>(rng.uniform_int(1, floors - 1));
      to = 0;
    } else {
      from = static_cast<int>(rng.uniform_int(0, floors - 1));
      to = from;
      while (to == from) to = static_cast<int>(rng.uniform_int(0, floors - 1));
    }
    tc.passengers.push_back(detail::make_passenger(t, from, to, rng));
  }
  detail::finalize(tc);
  return tc;
}

}  // namespace confrepair::traffic
