#pragma once

#include <vector>

#include "upr/instance.hpp"

namespace fx {

inline upr::Instance make(std::vector<int> storage, std::vector<upr::ArcData> arcs,
                          std::vector<std::pair<int, int>> pairs, int horizon) {
    std::vector<upr::NodeData> nodes;
    for (int b : storage) nodes.push_back({b});
    std::vector<upr::Commodity> com;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        com.push_back({static_cast<int>(i), pairs[i].first, pairs[i].second});
    return upr::Instance(std::move(nodes), std::move(arcs), std::move(com), horizon);
}

// s(0) -> m(1) -> t(2), unit transit, u = 1 on both arcs.
inline upr::Instance shared_arc(int b_mid, int b_src, int packets, int horizon) {
    std::vector<std::pair<int, int>> pairs(packets, {0, 2});
    return make({b_src, b_mid, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, pairs, horizon);
}

}  // namespace fx
