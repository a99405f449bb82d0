#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rebartie/error.hpp"
#include "rebartie/se3.hpp"

namespace rebartie::detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, where + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(ErrorCode::kConfig, where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, where + "." + key + ": wrong type");
  }
}

inline json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kConfig, where + ": expected [x, y, z]");
  }
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, where + ": expected numbers");
  }
}

inline void read_vec(const json& j, const char* key, Vec3& out, const std::string& where) {
  auto it = j.find(key);
  if (it != j.end()) out = vec_from_json(*it, where + "." + key);
}

inline json pose_json(const Pose& p) {
  const UnitQuaternion& q = p.rotation;
  return {{"q", json::array({q.w(), q.x(), q.y(), q.z()})}, {"t", vec_to_json(p.translation)}};
}

inline Pose pose_from_json(const json& j, const std::string& where) {
  check_keys(j, {"q", "t"}, where);
  Pose p;
  if (auto it = j.find("q"); it != j.end()) {
    if (!it->is_array() || it->size() != 4) {
      throw Error(ErrorCode::kConfig, where + ".q: expected [w, x, y, z]");
    }
    try {
      p.rotation = UnitQuaternion((*it)[0].get<double>(), (*it)[1].get<double>(),
                                  (*it)[2].get<double>(), (*it)[3].get<double>());
    } catch (const json::exception&) {
      throw Error(ErrorCode::kConfig, where + ".q: expected numbers");
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, where + ".q: " + e.what());
    }
  }
  read_vec(j, "t", p.translation, where);
  return p;
}

inline json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, where + ": " + e.what());
  }
}

}  // namespace rebartie::detail
