#include "semnav/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "semnav/error.hpp"

namespace semnav {

std::vector<CurvePoint> moving_average(const std::vector<RewardLogEntry>& episodes, int window) {
    if (window < 1) throw ContractError("moving average window must be >= 1");
    std::vector<CurvePoint> out;
    if (episodes.empty()) return out;
    const auto w = static_cast<std::size_t>(window);
    if (episodes.size() < w) {
        double sum = 0.0;
        for (const auto& e : episodes) sum += e.episode_return;
        out.push_back({static_cast<double>(episodes.back().frames), sum / static_cast<double>(episodes.size())});
        return out;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        sum += episodes[i].episode_return;
        if (i >= w) sum -= episodes[i - w].episode_return;
        if (i + 1 >= w) out.push_back({static_cast<double>(episodes[i].frames), sum / static_cast<double>(w)});
    }
    return out;
}

std::string reward_curve_svg(const std::vector<RewardLogEntry>& log, int window) {
    if (log.empty()) throw ContractError("reward log is empty");
    std::map<std::pair<std::string, int>, std::vector<RewardLogEntry>> series;
    for (const auto& e : log) series[{e.scene_id, e.target_idx}].push_back(e);

    std::vector<std::pair<std::string, std::vector<CurvePoint>>> curves;
    double max_x = 1.0;
    double min_y = 0.0;
    double max_y = 10.0;
    for (auto& [key, eps] : series) {
        std::stable_sort(eps.begin(), eps.end(), [](const auto& a, const auto& b) { return a.frames < b.frames; });
        auto pts = moving_average(eps, window);
        for (const auto& p : pts) {
            max_x = std::max(max_x, p.frames);
            min_y = std::min(min_y, p.value);
            max_y = std::max(max_y, p.value);
        }
        curves.emplace_back(key.first + "#" + std::to_string(key.second), std::move(pts));
    }

    constexpr double kW = 800, kH = 500, kLeft = 60, kRight = 200, kTop = 20, kBottom = 50;
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + plot_w * x / max_x; };
    auto sy = [&](double y) { return kTop + plot_h * (1.0 - (y - min_y) / (max_y - min_y)); };
    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ostringstream os;
    char buf[128];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                  kTop + plot_h, kLeft + plot_w, kTop + plot_h);
    os << buf;
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                  kTop, kLeft, kTop + plot_h);
    os << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">frames (max %.0f)</text>\n",
                  kLeft + plot_w / 2 - 40, kH - 15, max_x);
    os << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"5\" y=\"%.1f\" font-size=\"12\">%.2f</text>\n", kTop + 10, max_y);
    os << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"5\" y=\"%.1f\" font-size=\"12\">%.2f</text>\n", kTop + plot_h, min_y);
    os << buf;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kColors[c % 10];
        const auto& pts = curves[c].second;
        if (pts.size() == 1) {
            std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", sx(pts[0].frames),
                          sy(pts[0].value), color);
            os << buf;
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
            for (const auto& p : pts) {
                std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(p.frames), sy(p.value));
                os << buf;
            }
            os << "\"/>\n";
        }
        std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" fill=\"%s\">", kW - kRight + 10,
                      kTop + 14.0 * static_cast<double>(c + 1), color);
        os << buf << curves[c].first << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace semnav
