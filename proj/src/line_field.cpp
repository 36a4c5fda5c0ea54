#include "lanemap/line_field.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "lanemap/field_render.hpp"

namespace lanemap {

LaneType FieldCell::argmax_type() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < type_scores.size(); ++i) {
        if (type_scores[i] > type_scores[best]) best = i;
    }
    return static_cast<LaneType>(best);
}

LineField::LineField(CropSpec crop, double stride) : crop_(crop), stride_(stride) {
    if (!(crop.width > 0.0 && crop.height > 0.0)) {
        throw std::invalid_argument("LineField: crop must have positive size");
    }
    if (!(crop.zoom_ratio > 0.0)) {
        throw std::invalid_argument("LineField: zoom_ratio must be positive");
    }
    if (!(stride > 0.0)) {
        throw std::invalid_argument("LineField: stride must be positive");
    }
    cols_ = static_cast<std::size_t>(std::ceil(crop.width * crop.zoom_ratio / stride));
    rows_ = static_cast<std::size_t>(std::ceil(crop.height * crop.zoom_ratio / stride));
    cols_ = std::max<std::size_t>(cols_, 1);
    rows_ = std::max<std::size_t>(rows_, 1);
    cells_.resize(cols_ * rows_);
}

LineField render_gt_field(std::span<const Lane> lanes, const CropSpec& crop,
                          const FieldConfig& config) {
    FieldRenderer renderer(lanes, {}, config);
    return renderer.render(crop);
}

std::vector<DecodedPoint> decode_points(const LineField& field, double conf_threshold,
                                        double mask_threshold) {
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0) ||
        !(mask_threshold >= 0.0 && mask_threshold <= 1.0)) {
        throw std::invalid_argument("decode_points: thresholds must lie in [0, 1]");
    }
    std::vector<DecodedPoint> out;
    const double zoom = field.zoom_ratio();
    for (std::size_t r = 0; r < field.rows(); ++r) {
        for (std::size_t c = 0; c < field.cols(); ++c) {
            const FieldCell& cell = field.at(r, c);
            if (cell.mask < mask_threshold || cell.confidence < conf_threshold) continue;
            const Point2 full = field.to_full_image(cell.anchor + cell.position);
            DecodedPoint p;
            p.point = ZoomedPoint{full.x, full.y, zoom};
            p.type = cell.argmax_type();
            p.direction = cell.direction;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<Rect> uncertain_regions(const LineField& field, double conf_threshold,
                                    double mask_threshold) {
    const auto cols = field.cols();
    const auto rows = field.rows();
    std::vector<char> uncertain(cols * rows, 0);
    for (std::size_t i = 0; i < cols * rows; ++i) {
        const FieldCell& cell = field.cells()[i];
        uncertain[i] = (cell.mask >= mask_threshold && cell.confidence < conf_threshold) ? 1 : 0;
    }

    const double stride = field.stride();
    const double zoom = field.zoom_ratio();
    const Point2 origin = field.crop().origin;

    std::vector<Rect> regions;
    std::vector<char> visited(cols * rows, 0);
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < cols * rows; ++start) {
        if (!uncertain[start] || visited[start]) continue;
        std::size_t cmin = cols, cmax = 0, rmin = rows, rmax = 0;
        visited[start] = 1;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t idx = queue.front();
            queue.pop_front();
            const std::size_t r = idx / cols;
            const std::size_t c = idx % cols;
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
            const auto try_push = [&](std::size_t nr, std::size_t nc) {
                const std::size_t nidx = nr * cols + nc;
                if (!visited[nidx] && uncertain[nidx]) {
                    visited[nidx] = 1;
                    queue.push_back(nidx);
                }
            };
            if (c > 0) try_push(r, c - 1);
            if (c + 1 < cols) try_push(r, c + 1);
            if (r > 0) try_push(r - 1, c);
            if (r + 1 < rows) try_push(r + 1, c);
        }
        Rect rect;
        rect.x0 = origin.x + (static_cast<double>(cmin) * stride) / zoom;
        rect.y0 = origin.y + (static_cast<double>(rmin) * stride) / zoom;
        rect.x1 = origin.x + (static_cast<double>(cmax + 1) * stride) / zoom;
        rect.y1 = origin.y + (static_cast<double>(rmax + 1) * stride) / zoom;
        regions.push_back(rect);
    }
    return regions;
}

}  // namespace lanemap
