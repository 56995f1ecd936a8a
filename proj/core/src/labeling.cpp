#include "infiltra/labeling.hpp"

namespace infiltra {

ComponentMap connected_components(const MaskGrid& mask) {
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    ComponentMap out;
    out.labels = Grid<std::int32_t>(w, h, 0);

    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (mask[start] == 0 || out.labels[start] != 0) continue;
        const std::int32_t label = ++out.count;
        std::int64_t area = 0;
        stack.push_back(start);
        out.labels[start] = label;
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            ++area;
            const std::size_t x = idx % w;
            const std::size_t y = idx / w;
            const std::size_t x0 = x > 0 ? x - 1 : x;
            const std::size_t x1 = x + 1 < w ? x + 1 : x;
            const std::size_t y0 = y > 0 ? y - 1 : y;
            const std::size_t y1 = y + 1 < h ? y + 1 : y;
            for (std::size_t ny = y0; ny <= y1; ++ny) {
                for (std::size_t nx = x0; nx <= x1; ++nx) {
                    const std::size_t nidx = ny * w + nx;
                    if (mask[nidx] != 0 && out.labels[nidx] == 0) {
                        out.labels[nidx] = label;
                        stack.push_back(nidx);
                    }
                }
            }
        }
        out.area.push_back(area);
    }
    return out;
}

MaskGrid area_opening(const MaskGrid& mask, std::int64_t min_area_px) {
    if (min_area_px <= 0) return mask;
    const ComponentMap cc = connected_components(mask);
    MaskGrid out(mask.width(), mask.height(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const std::int32_t label = cc.labels[i];
        if (label != 0 && cc.area[static_cast<std::size_t>(label) - 1] >= min_area_px)
            out[i] = 1;
    }
    return out;
}

}  // namespace infiltra
