// Copyright 2026 The E-Motion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOTION_EVENT_SIM_EVENTS_HPP_
#define EMOTION_EVENT_SIM_EVENTS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/event_sim/render.hpp"
#include "emotion/event_sim/scene.hpp"

namespace emotion {

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;  // -1 or +1
  std::uint32_t t = 0;  // [us]

  friend bool operator==(const Event&, const Event&) = default;
};

// Stream order: timestamp, then row, column and polarity.
inline bool event_before(const Event& a, const Event& b) noexcept {
  return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

struct EventStream {
  int width = 0;
  int height = 0;
  std::uint32_t duration_us = 0;
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
};

struct EventSimParams {
  double threshold = 0.15;          // contrast threshold C [log-intensity]
  std::uint32_t dt_us = 100;        // intensity sampling period
  double intensity_floor = 1e-3;    // added before the logarithm
};

// Checks coordinates, polarity values, time bounds and ordering.
inline void validate(const EventStream& s) {
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const Event& e = s.events[i];
    if (e.x >= s.width || e.y >= s.height) {
      throw DataError("event " + std::to_string(i) + " outside the sensor");
    }
    if (e.p != 1 && e.p != -1) throw DataError("event " + std::to_string(i) + " bad polarity");
    if (e.t > s.duration_us) throw DataError("event " + std::to_string(i) + " after stream end");
    if (i > 0 && event_before(e, s.events[i - 1])) {
      throw DataError("event " + std::to_string(i) + " out of order");
    }
  }
}

// Threshold model on sampled log-intensity. Each pixel keeps an integer
// count n of net emitted polarity; its reference level is L(0) + n*C. Every
// crossing of the next reference level emits one event whose timestamp is
// interpolated linearly inside the sampling interval.
inline EventStream emit_events(const SceneSpec& spec, const EventSimParams& params = {}) {
  validate(spec);
  if (!(params.threshold > 0.0)) throw ParameterError("contrast threshold must be positive");
  if (params.dt_us == 0 || spec.duration_us % params.dt_us != 0) {
    throw ParameterError("sampling period must divide the scene duration");
  }
  if (!(params.intensity_floor > 0.0)) throw ParameterError("intensity floor must be positive");

  // Crossing tolerance in threshold units; absorbs round-off in exact k*C steps.
  constexpr double kTol = 1e-9;

  const std::size_t n_pix = static_cast<std::size_t>(spec.width) * spec.height;
  const double inv_c = 1.0 / params.threshold;
  EventStream out{spec.width, spec.height, spec.duration_us, {}};

  IntensityFrame frame = render_scene(spec, 0);
  std::vector<double> last_intensity = frame.values;
  std::vector<double> log0(n_pix), level(n_pix);  // level = (L - L0) / C
  std::vector<std::int64_t> count(n_pix, 0);
  for (std::size_t i = 0; i < n_pix; ++i) {
    log0[i] = std::log(frame.values[i] + params.intensity_floor);
    level[i] = 0.0;
  }

  const std::uint32_t steps = spec.duration_us / params.dt_us;
  for (std::uint32_t k = 1; k <= steps; ++k) {
    const std::uint32_t t_prev = (k - 1) * params.dt_us;
    frame = render_scene(spec, static_cast<std::int64_t>(k) * params.dt_us);
    for (std::size_t i = 0; i < n_pix; ++i) {
      if (frame.values[i] == last_intensity[i]) continue;
      last_intensity[i] = frame.values[i];
      const double u_prev = level[i];
      const double u = (std::log(frame.values[i] + params.intensity_floor) - log0[i]) * inv_c;
      level[i] = u;
      const auto emit = [&](std::int64_t crossed, std::int8_t p) {
        const double frac = (static_cast<double>(crossed) - u_prev) / (u - u_prev);
        auto offset = static_cast<std::int64_t>(std::llround(frac * params.dt_us));
        offset = std::clamp<std::int64_t>(offset, 1, params.dt_us);
        out.events.push_back(Event{static_cast<std::uint16_t>(i % spec.width),
                                   static_cast<std::uint16_t>(i / spec.width), p,
                                   static_cast<std::uint32_t>(t_prev + offset)});
      };
      while (u - static_cast<double>(count[i]) >= 1.0 - kTol) {
        emit(++count[i], 1);
      }
      while (static_cast<double>(count[i]) - u >= 1.0 - kTol) {
        emit(--count[i], -1);
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(), event_before);
  return out;
}

}  // namespace emotion

#endif  // EMOTION_EVENT_SIM_EVENTS_HPP_
