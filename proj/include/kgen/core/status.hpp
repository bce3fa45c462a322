#pragma once

#include <optional>
#include <string_view>

namespace kgen::core {

enum class VerifyStatus { Pass, NumericFail, CompileFail, RuntimeFail, Timeout };

std::string_view status_name(VerifyStatus s);
std::optional<VerifyStatus> status_from(std::string_view name);

}  // namespace kgen::core
