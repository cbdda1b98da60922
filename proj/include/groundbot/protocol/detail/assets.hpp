#pragma once

#include <cstddef>
#include <string_view>

namespace groundbot::protocol::detail {

struct AssetEntry {
  std::string_view name;
  std::string_view text;
};

extern const std::string_view kPromptAssetVersion;
extern const AssetEntry kPromptAssets[];
extern const std::size_t kPromptAssetCount;

}  // namespace groundbot::protocol::detail
