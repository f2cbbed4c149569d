#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netscale/detail/random.hpp"
#include "netscale/error.hpp"

namespace netscale {

enum class FitForm {
    power_law,    // y = a * n^b
    logarithmic,  // y = a + b * log10(n)
};

inline std::string_view to_string(FitForm f) noexcept {
    return f == FitForm::power_law ? "power-law" : "logarithmic";
}

/// One network's (size, measure) pair; an empty y is an undefined measure.
struct FitPoint {
    double n = 0;
    std::optional<double> y;
};

struct ScalingFit {
    FitForm form = FitForm::power_law;
    double a = 0;
    double b = 0;
    double sd_a = 0;
    double sd_b = 0;
    std::size_t points_used = 0;
    std::size_t points_excluded = 0;
    std::map<std::string, std::size_t> exclusion_reasons;
    std::size_t resamples = 0;

    double operator()(double n) const {
        return form == FitForm::power_law ? a * std::pow(n, b) : a + b * std::log10(n);
    }
};

namespace detail {

struct Design {
    std::vector<double> x, y;  // transformed coordinates
    std::size_t excluded = 0;
    std::map<std::string, std::size_t> reasons;
};

inline Design make_design(std::span<const FitPoint> points, FitForm form) {
    Design d;
    auto exclude = [&](const char* why) {
        ++d.excluded;
        ++d.reasons[why];
    };
    for (const auto& p : points) {
        if (!p.y || !std::isfinite(*p.y)) exclude("undefined");
        else if (!(p.n > 0)) exclude("non-positive-n");
        else if (form == FitForm::power_law && !(*p.y > 0)) exclude("non-positive-y");
        else {
            d.x.push_back(std::log10(p.n));
            d.y.push_back(form == FitForm::power_law ? std::log10(*p.y) : *p.y);
        }
    }
    return d;
}

/// Least squares (intercept, slope); nullopt when x has zero variance.
inline std::optional<std::pair<double, double>> ols(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return std::nullopt;
    const auto k = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) return std::nullopt;
    double slope = sxy / sxx;
    return std::pair{my - slope * mx, slope};
}

inline std::pair<double, double> to_coefficients(FitForm form, std::pair<double, double> line) {
    return {form == FitForm::power_law ? std::pow(10.0, line.first) : line.first, line.second};
}

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Ordinary least squares in the form's linearizing coordinates. Points
/// with undefined y, n <= 0, or (power law only) y <= 0 are excluded and
/// counted by reason.
inline ScalingFit fit_scaling(std::span<const FitPoint> points, FitForm form) {
    auto d = detail::make_design(points, form);
    if (d.x.size() < 2)
        throw InsufficientDataError("need at least two usable points, have " + std::to_string(d.x.size()));
    auto line = detail::ols(d.x, d.y);
    if (!line) throw DegenerateDesignError("all usable points have the same n");
    ScalingFit fit;
    fit.form = form;
    std::tie(fit.a, fit.b) = detail::to_coefficients(form, *line);
    fit.points_used = d.x.size();
    fit.points_excluded = d.excluded;
    fit.exclusion_reasons = std::move(d.reasons);
    return fit;
}

/// y = a * n^b via OLS of log10 y on log10 n.
inline ScalingFit fit_power_law(std::span<const FitPoint> points) { return fit_scaling(points, FitForm::power_law); }

/// y = a + b * log10 n via OLS of y on log10 n.
inline ScalingFit fit_logarithmic(std::span<const FitPoint> points) { return fit_scaling(points, FitForm::logarithmic); }

/// Case-resampling bootstrap standard deviations of (a, b).
/// Resamples whose design is degenerate are redrawn.
inline std::pair<double, double> bootstrap_sd(std::span<const FitPoint> points, FitForm form, std::size_t resamples,
                                              std::uint64_t seed) {
    auto d = detail::make_design(points, form);
    if (d.x.size() < 2)
        throw InsufficientDataError("need at least two usable points, have " + std::to_string(d.x.size()));
    if (!detail::ols(d.x, d.y)) throw DegenerateDesignError("all usable points have the same n");

    const std::size_t k = d.x.size();
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::vector<double> xs(k), ys(k), as, bs;
    as.reserve(resamples);
    bs.reserve(resamples);
    while (as.size() < resamples) {
        for (std::size_t i = 0; i < k; ++i) {
            auto j = pick(rng);
            xs[i] = d.x[j];
            ys[i] = d.y[j];
        }
        auto line = detail::ols(xs, ys);
        if (!line) continue;
        auto [a, b] = detail::to_coefficients(form, *line);
        as.push_back(a);
        bs.push_back(b);
    }
    return {detail::sample_sd(as), detail::sample_sd(bs)};
}

/// Point estimate plus bootstrap uncertainties.
inline ScalingFit fit_with_bootstrap(std::span<const FitPoint> points, FitForm form, std::size_t resamples,
                                     std::uint64_t seed) {
    auto fit = fit_scaling(points, form);
    if (resamples > 0) std::tie(fit.sd_a, fit.sd_b) = bootstrap_sd(points, form, resamples, seed);
    fit.resamples = resamples;
    return fit;
}

}  // namespace netscale
