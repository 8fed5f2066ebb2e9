#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gax/shapes.hpp"
#include "gax/teacher.hpp"

namespace gax {

inline constexpr int kFormatVersion = 1;

// Doubles are written in shortest round-trip form, so reading back gives the
// identical bits.
std::string teacher_to_json(const TeacherNet& net);
TeacherNet teacher_from_json(std::string_view text);

// config_json, when non-empty, must be a JSON object; it is stored verbatim
// under "config" and ignored on load.
std::string model_to_json(const AdditiveModel& m, std::string_view config_json = {});
AdditiveModel model_from_json(std::string_view text);

void save_teacher(const TeacherNet& net, const std::filesystem::path& path);
TeacherNet load_teacher(const std::filesystem::path& path);
void save_model(const AdditiveModel& m, const std::filesystem::path& path,
                std::string_view config_json = {});
AdditiveModel load_model(const std::filesystem::path& path);

// Whole-file helpers; MissingArtifact when the file does not exist.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace gax
