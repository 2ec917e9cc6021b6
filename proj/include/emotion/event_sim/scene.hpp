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

#ifndef EMOTION_EVENT_SIM_SCENE_HPP_
#define EMOTION_EVENT_SIM_SCENE_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "emotion/core/error.hpp"
#include "json.hpp"

namespace emotion {

enum class ShapeKind { kRectangle, kDisk, kBar };

NLOHMANN_JSON_SERIALIZE_ENUM(ShapeKind, {
  {ShapeKind::kRectangle, "rectangle"},
  {ShapeKind::kDisk, "disk"},
  {ShapeKind::kBar, "bar"},
})

// A rigid object moving at constant velocity. Positions are object centres
// in pixel coordinates (pixel (x, y) has its centre at (x + 0.5, y + 0.5)).
// For disks only size[0] (the diameter) is used.
struct SceneObject {
  ShapeKind shape = ShapeKind::kRectangle;
  std::array<double, 2> size{4.0, 4.0};       // width, height [px]
  std::array<double, 2> position{0.0, 0.0};   // x, y at t = 0 [px]
  std::array<double, 2> velocity{0.0, 0.0};   // [px/s]
  double angular_velocity = 0.0;              // [rad/s]
  double intensity = 1.0;                     // [0, 1]
};

struct CameraShake {
  double amplitude = 0.0;  // [px]
  double frequency = 0.0;  // [Hz]
};

struct SceneSpec {
  int height = 64;
  int width = 64;
  std::uint32_t duration_us = 100000;
  double background = 0.0;
  std::vector<SceneObject> objects;
  CameraShake shake;
  std::uint64_t seed = 0;
};

inline void validate(const SceneSpec& spec) {
  if (spec.height <= 0 || spec.width <= 0 || spec.height > 65535 || spec.width > 65535) {
    throw ParameterError("scene canvas must be between 1 and 65535 pixels per side");
  }
  if (spec.duration_us == 0) throw ParameterError("scene duration must be positive");
  if (!(spec.background >= 0.0 && spec.background <= 1.0)) {
    throw ParameterError("background intensity outside [0, 1]");
  }
  if (spec.shake.amplitude < 0.0 || spec.shake.frequency < 0.0) {
    throw ParameterError("camera shake amplitude and frequency must be non-negative");
  }
  for (const auto& o : spec.objects) {
    if (!(o.intensity >= 0.0 && o.intensity <= 1.0)) {
      throw ParameterError("object intensity outside [0, 1]");
    }
    if (!(o.size[0] > 0.0) || (o.shape != ShapeKind::kDisk && !(o.size[1] > 0.0))) {
      throw ParameterError("object size must be positive");
    }
    if (o.position[0] < 0.0 || o.position[0] >= spec.width || o.position[1] < 0.0 ||
        o.position[1] >= spec.height) {
      throw ParameterError("object initial position outside the canvas");
    }
  }
}

inline void to_json(nlohmann::json& j, const SceneObject& o) {
  j = nlohmann::json{{"shape", o.shape},
                     {"size", o.size},
                     {"position", o.position},
                     {"velocity", o.velocity},
                     {"angular_velocity", o.angular_velocity},
                     {"intensity", o.intensity}};
}

inline void from_json(const nlohmann::json& j, SceneObject& o) {
  o = SceneObject{};
  j.at("shape").get_to(o.shape);
  j.at("size").get_to(o.size);
  j.at("position").get_to(o.position);
  if (j.contains("velocity")) j.at("velocity").get_to(o.velocity);
  if (j.contains("angular_velocity")) j.at("angular_velocity").get_to(o.angular_velocity);
  j.at("intensity").get_to(o.intensity);
}

inline void to_json(nlohmann::json& j, const SceneSpec& s) {
  j = nlohmann::json{{"height", s.height},
                     {"width", s.width},
                     {"duration_us", s.duration_us},
                     {"background", s.background},
                     {"objects", s.objects},
                     {"shake", {{"amplitude", s.shake.amplitude},
                                {"frequency", s.shake.frequency}}},
                     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, SceneSpec& s) {
  s = SceneSpec{};
  j.at("height").get_to(s.height);
  j.at("width").get_to(s.width);
  j.at("duration_us").get_to(s.duration_us);
  j.at("background").get_to(s.background);
  if (j.contains("objects")) j.at("objects").get_to(s.objects);
  if (j.contains("shake")) {
    s.shake.amplitude = j.at("shake").value("amplitude", 0.0);
    s.shake.frequency = j.at("shake").value("frequency", 0.0);
  }
  s.seed = j.value("seed", std::uint64_t{0});
}

}  // namespace emotion

#endif  // EMOTION_EVENT_SIM_SCENE_HPP_
