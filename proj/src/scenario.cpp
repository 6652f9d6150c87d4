#include "aerograsp/scenario.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace aerograsp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw ConfigInvalid("bad value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) {
            bad_value(key, value);
        }
        return parsed;
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) {
            bad_value(key, value);
        }
        return parsed;
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long parsed = std::stoull(value, &used);
        if (used != value.size()) {
            bad_value(key, value);
        }
        return parsed;
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    bad_value(key, value);
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value,
                                  std::size_t count) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        out.push_back(parse_double(key, token));
    }
    if (out.size() != count) {
        bad_value(key, value);
    }
    return out;
}

Vec2 parse_vec2(const std::string& key, const std::string& value) {
    const auto v = parse_doubles(key, value, 2);
    return Vec2(v[0], v[1]);
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
    const auto v = parse_doubles(key, value, 3);
    return Vec3(v[0], v[1], v[2]);
}

ObjectClass parse_color(const std::string& key, const std::string& value) {
    if (value == "red") {
        return ObjectClass::Red;
    }
    if (value == "blue") {
        return ObjectClass::Blue;
    }
    if (value == "black") {
        return ObjectClass::Black;
    }
    bad_value(key, value);
}

ExperimentType parse_experiment(const std::string& key, const std::string& value) {
    if (value == "static") {
        return ExperimentType::Static;
    }
    if (value == "wind") {
        return ExperimentType::Wind;
    }
    if (value == "dynamic") {
        return ExperimentType::Dynamic;
    }
    bad_value(key, value);
}

/// Camera keys accumulate here; the validated intrinsics are built once at
/// the end so partial overrides of the default still go through make().
struct CameraSettings {
    bool touched = false;
    int width = 0;
    int height = 0;
    double focal_x = 0.0;
    double focal_y = 0.0;
    std::optional<double> principal_x;
    std::optional<double> principal_y;
    std::array<double, 4> distortion{0.05, 0.0, 0.0, 0.0};
};

struct ObjectSettings {
    WorldObject object;
    double yaw_deg = 0.0;
};

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig config;
    config.camera = CameraIntrinsics::synthetic_default();

    CameraSettings cam;
    cam.width = config.camera.width;
    cam.height = config.camera.height;
    cam.focal_x = config.camera.focal_x;
    cam.focal_y = config.camera.focal_y;
    cam.distortion = config.camera.distortion;

    std::vector<ObjectSettings> objects;
    auto object_at = [&objects](const std::string& key, int index) -> ObjectSettings& {
        if (index < 0 || index > int(objects.size())) {
            throw ConfigInvalid("object index out of order in key '" + key + "'");
        }
        if (index == int(objects.size())) {
            objects.emplace_back();
        }
        return objects[std::size_t(index)];
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigInvalid("expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigInvalid("expected 'key = value', got '" + line + "'");
        }

        if (key == "seed") {
            config.seed = parse_u64(key, value);
        } else if (key == "max_sim_time") {
            config.max_sim_time = parse_double(key, value);
        } else if (key == "experiment") {
            config.experiment = parse_experiment(key, value);
        } else if (key == "record_ticks") {
            config.record_ticks = parse_bool(key, value);
        } else if (key == "drop_radius") {
            config.drop_radius = parse_double(key, value);
        } else if (key == "support_plane_z") {
            config.support_plane_z = parse_double(key, value);
        } else if (key == "mav.mass") {
            config.mav_mass = parse_double(key, value);
        } else if (key == "mav.start") {
            config.mav_start = parse_vec3(key, value);
        } else if (key == "noise.detection_jitter_px") {
            config.detection_jitter_px = parse_double(key, value);
        } else if (key == "noise.reflection_probability") {
            config.reflection_probability = parse_double(key, value);
        } else if (key == "noise.reflection_offset_min") {
            config.reflection_offset_min = parse_double(key, value);
        } else if (key == "noise.reflection_offset_max") {
            config.reflection_offset_max = parse_double(key, value);
        } else if (key == "wind.mean_speed") {
            config.wind.mean_speed = parse_double(key, value);
        } else if (key == "wind.gust_amplitude") {
            config.wind.gust_amplitude = parse_double(key, value);
        } else if (key == "wind.direction_deg") {
            config.wind.direction_deg = parse_double(key, value);
        } else if (key == "wind.correlation_time") {
            config.wind.correlation_time = parse_double(key, value);
        } else if (key == "wind.drag_coefficient") {
            config.wind.drag_coefficient = parse_double(key, value);
        } else if (key == "platform.velocity") {
            config.platform_velocity = parse_vec2(key, value);
        } else if (key == "camera.width") {
            cam.width = parse_int(key, value);
            cam.touched = true;
        } else if (key == "camera.height") {
            cam.height = parse_int(key, value);
            cam.touched = true;
        } else if (key == "camera.focal") {
            cam.focal_x = cam.focal_y = parse_double(key, value);
            cam.touched = true;
        } else if (key == "camera.focal_x") {
            cam.focal_x = parse_double(key, value);
            cam.touched = true;
        } else if (key == "camera.focal_y") {
            cam.focal_y = parse_double(key, value);
            cam.touched = true;
        } else if (key == "camera.principal_x") {
            cam.principal_x = parse_double(key, value);
            cam.touched = true;
        } else if (key == "camera.principal_y") {
            cam.principal_y = parse_double(key, value);
            cam.touched = true;
        } else if (key == "camera.k1" || key == "camera.k2" || key == "camera.k3" ||
                   key == "camera.k4") {
            cam.distortion[std::size_t(key[8] - '1')] = parse_double(key, value);
            cam.touched = true;
        } else if (key == "camera.translation") {
            config.camera_translation = parse_vec3(key, value);
        } else if (key == "mission.operation_height") {
            config.mission.operation_height = parse_double(key, value);
        } else if (key == "mission.hover_height") {
            config.mission.hover_height = parse_double(key, value);
        } else if (key == "mission.align_radius") {
            config.mission.align_radius = parse_double(key, value);
        } else if (key == "mission.wait_threshold") {
            config.mission.wait_threshold = parse_double(key, value);
        } else if (key == "mission.drop_zone") {
            config.mission.drop_zone = parse_vec3(key, value);
        } else if (key == "mission.drop_hover_height") {
            config.mission.drop_hover_height = parse_double(key, value);
        } else if (key == "mission.drop_hover_time") {
            config.mission.drop_hover_time = parse_double(key, value);
        } else if (key == "mission.force_threshold") {
            config.mission.grasp.force_threshold = parse_double(key, value);
        } else if (key == "mission.max_pickup_attempts") {
            config.mission.max_pickup_attempts = parse_int(key, value);
        } else if (key == "mission.descent_rate") {
            config.mission.descent_rate = parse_double(key, value);
        } else if (key == "mission.final_descent_rate") {
            config.mission.final_descent_rate = parse_double(key, value);
        } else if (key == "mission.ascent_rate") {
            config.mission.ascent_rate = parse_double(key, value);
        } else if (key == "mission.transport_speed") {
            config.mission.transport_speed = parse_double(key, value);
        } else if (key == "mission.gripper_drop") {
            config.mission.gripper_drop = parse_double(key, value);
        } else if (key == "mission.contact_tolerance") {
            config.mission.contact_tolerance = parse_double(key, value);
        } else if (key == "mission.verify_hold_time") {
            config.mission.verify_hold_time = parse_double(key, value);
        } else if (key == "mission.target_lost_timeout") {
            config.mission.target_lost_timeout = parse_double(key, value);
        } else if (key == "mission.target_gate_radius") {
            config.mission.target_gate_radius = parse_double(key, value);
        } else if (key == "mission.sphere_check_3d") {
            config.mission.sphere_check_3d = parse_bool(key, value);
        } else if (key == "control.kp") {
            config.pid.kp = parse_double(key, value);
        } else if (key == "control.ki") {
            config.pid.ki = parse_double(key, value);
        } else if (key == "control.kd") {
            config.pid.kd = parse_double(key, value);
        } else if (key == "control.output_saturation") {
            config.pid.output_saturation = parse_double(key, value);
        } else if (key == "control.integrator_limit") {
            config.pid.integrator_limit = parse_double(key, value);
        } else if (key == "control.tracker_natural_frequency") {
            config.tracker_natural_frequency = parse_double(key, value);
        } else if (key == "control.tracker_damping") {
            config.tracker_damping = parse_double(key, value);
        } else if (key == "control.observer_process_noise") {
            config.observer_process_noise = parse_double(key, value);
        } else if (key == "control.observer_measurement_noise") {
            config.observer_measurement_noise = parse_double(key, value);
        } else if (key.rfind("object.", 0) == 0) {
            const auto dot = key.find('.', 7);
            if (dot == std::string::npos) {
                throw ConfigInvalid("unknown key '" + key + "'");
            }
            const std::string index_str = key.substr(7, dot - 7);
            int index = 0;
            const auto [ptr, ec] =
                std::from_chars(index_str.data(), index_str.data() + index_str.size(), index);
            if (ec != std::errc() || ptr != index_str.data() + index_str.size()) {
                throw ConfigInvalid("unknown key '" + key + "'");
            }
            ObjectSettings& entry = object_at(key, index);
            const std::string field = key.substr(dot + 1);
            if (field == "width") {
                entry.object.width = parse_double(key, value);
            } else if (field == "depth") {
                entry.object.depth = parse_double(key, value);
            } else if (field == "thickness") {
                entry.object.thickness = parse_double(key, value);
            } else if (field == "bend_angle_deg") {
                entry.object.bend_angle_deg = parse_double(key, value);
            } else if (field == "mass") {
                entry.object.mass = parse_double(key, value);
            } else if (field == "color") {
                entry.object.color_class = parse_color(key, value);
            } else if (field == "ferrous") {
                entry.object.ferrous = parse_bool(key, value);
            } else if (field == "position") {
                entry.object.pose.translation = parse_vec3(key, value);
            } else if (field == "yaw_deg") {
                entry.yaw_deg = parse_double(key, value);
            } else if (field == "carrier") {
                if (value == "ground") {
                    entry.object.carrier = Carrier::Ground;
                } else if (value == "platform") {
                    entry.object.carrier = Carrier::Platform;
                } else {
                    bad_value(key, value);
                }
            } else {
                throw ConfigInvalid("unknown key '" + key + "'");
            }
        } else {
            throw ConfigInvalid("unknown key '" + key + "'");
        }
    }

    if (cam.touched) {
        const double px = cam.principal_x.value_or((cam.width - 1) / 2.0);
        const double py = cam.principal_y.value_or((cam.height - 1) / 2.0);
        try {
            config.camera = CameraIntrinsics::make(cam.width, cam.height, cam.focal_x,
                                                   cam.focal_y, px, py, cam.distortion);
        } catch (const Error& err) {
            throw ConfigInvalid(std::string("camera.*: ") + err.what());
        }
    }

    for (ObjectSettings& entry : objects) {
        entry.object.pose.rotation = Rotation::rot_z(entry.yaw_deg * M_PI / 180.0);
        config.objects.push_back(entry.object);
    }
    return config;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigInvalid("cannot read scenario file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

}  // namespace aerograsp
