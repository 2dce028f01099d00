#include "nhlat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nhlat/errors.hpp"

namespace nhlat {

const char* to_string(FitKind k) { return k == FitKind::Power ? "power" : "exponential"; }

namespace {

struct LineFit {
    double slope, intercept, std_error, r2;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) throw WindowTooNarrow("fit abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ssr += r * r;
    }
    f.std_error = x.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    f.r2 = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    return f;
}

void check_series(const std::vector<double>& times, const std::vector<double>& magnitudes) {
    if (times.size() != magnitudes.size())
        throw SizeError("times and magnitudes differ in length");
}

void check_window(std::array<double, 2> w) {
    if (!(w[0] >= 0) || !(w[1] > w[0]) || !std::isfinite(w[1]))
        throw WindowTooNarrow("fit window must satisfy 0 <= lo < hi < inf");
}

constexpr int kMinFitPoints = 10;

FitReport power_fit(const std::vector<double>& times, const std::vector<double>& magnitudes,
                    std::array<double, 2> window) {
    check_series(times, magnitudes);
    check_window(window);
    if (window[0] <= 0 || window[1] < 10.0 * window[0] * (1 - 1e-12))
        throw WindowTooNarrow("power-law window must span at least one decade of t > 0");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < window[0] || times[i] > window[1] || magnitudes[i] <= kAmplitudeFloor) continue;
        x.push_back(std::log(times[i]));
        y.push_back(std::log(magnitudes[i]));
    }
    if (static_cast<int>(x.size()) < kMinFitPoints)
        throw WindowTooNarrow("only " + std::to_string(x.size()) + " usable points in the power-law window");
    const LineFit f = least_squares(x, y);
    return {FitKind::Power, f.slope, f.std_error, f.intercept, window, f.r2, static_cast<int>(x.size())};
}

// Vertex of the parabola through three samples.
Peak refine(double t0, double y0, double t1, double y1, double t2, double y2) {
    const double d0 = (y1 - y0) / (t1 - t0), d1 = (y2 - y1) / (t2 - t1);
    const double a = (d1 - d0) / (t2 - t0);
    if (!(a < 0)) return {t1, y1};
    const double b = d0 - a * (t0 + t1);
    const double tv = std::clamp(-b / (2 * a), t0, t2);
    const double yv = y1 + (tv - t1) * (d0 + a * (tv - t0));
    return {tv, std::max(yv, y1)};
}

} // namespace

std::vector<Peak> envelope_peaks(const std::vector<double>& times, const std::vector<double>& magnitudes,
                                 const PeakOptions& options) {
    check_series(times, magnitudes);
    const std::size_t n = times.size();
    std::size_t lo = 0, hi = n;
    while (lo < n && times[lo] < options.t_lo) ++lo;
    while (hi > lo && times[hi - 1] > options.t_hi) --hi;
    if (hi - lo < 3) throw TooFewPeaks("fewer than three samples in the peak window");
    const double span = times[hi - 1] - times[lo];

    std::vector<std::size_t> candidates;
    for (std::size_t i = std::max<std::size_t>(lo, 1); i + 1 < hi; ++i)
        if (magnitudes[i] >= magnitudes[i - 1] && magnitudes[i] > magnitudes[i + 1]) candidates.push_back(i);

    double min_dt = span;
    for (std::size_t i = lo + 1; i < hi; ++i) min_dt = std::min(min_dt, times[i] - times[i - 1]);

    auto select = [&](double half) {
        std::vector<std::size_t> kept;
        for (std::size_t i : candidates) {
            const double t = times[i], m = magnitudes[i];
            bool dominant = true;
            std::size_t a = i, b = i;
            while (a > lo && times[a - 1] >= t - half) --a;
            while (b + 1 < hi && times[b + 1] <= t + half) ++b;
            for (std::size_t j = a; j <= b && dominant; ++j)
                if (magnitudes[j] > m) dominant = false;
            if (!dominant) continue;
            const auto left = std::min_element(magnitudes.begin() + static_cast<long>(a),
                                               magnitudes.begin() + static_cast<long>(i) + 1);
            const auto right = std::min_element(magnitudes.begin() + static_cast<long>(i),
                                                magnitudes.begin() + static_cast<long>(b) + 1);
            const auto il = static_cast<std::size_t>(left - magnitudes.begin());
            const auto ir = static_cast<std::size_t>(right - magnitudes.begin());
            double floor_at;
            if (ir == il) floor_at = *left;
            else floor_at = *left + (*right - *left) * (t - times[il]) / (times[ir] - times[il]);
            if (m >= options.prominence * floor_at) kept.push_back(i);
        }
        return kept;
    };

    double half = options.spacing_hint ? 0.5 * *options.spacing_hint : 0.25 * span;
    std::vector<std::size_t> kept;
    for (int iter = 0; iter < 60; ++iter) {
        kept = select(half);
        if (kept.size() < 3) {
            half *= 0.5;
            if (half < min_dt) break;
            continue;
        }
        const double spacing = (times[kept.back()] - times[kept.front()]) / static_cast<double>(kept.size() - 1);
        const double next = 0.5 * spacing;
        if (std::abs(next - half) <= 1e-9 * half) break;
        half = next;
    }
    if (kept.size() < 3) throw TooFewPeaks("fewer than three envelope peaks found");

    std::vector<Peak> peaks;
    for (std::size_t i : kept)
        peaks.push_back(refine(times[i - 1], magnitudes[i - 1], times[i], magnitudes[i], times[i + 1],
                               magnitudes[i + 1]));
    return peaks;
}

std::vector<Peak> envelope_peaks(const GreensSeries& series, const PeakOptions& options) {
    return envelope_peaks(series.times, series.magnitudes(), options);
}

FitReport fit_power_law(const std::vector<double>& times, const std::vector<double>& magnitudes,
                        std::array<double, 2> window) {
    return power_fit(times, magnitudes, window);
}

FitReport fit_power_law(const GreensSeries& series, std::array<double, 2> window) {
    return power_fit(series.times, series.magnitudes(), window);
}

FitReport fit_power_law(const std::vector<Peak>& peaks, std::array<double, 2> window) {
    check_window(window);
    if (window[0] <= 0 || window[1] < 10.0 * window[0] * (1 - 1e-12))
        throw WindowTooNarrow("power-law window must span at least one decade of t > 0");
    std::vector<double> x, y;
    for (const Peak& p : peaks) {
        if (p.t < window[0] || p.t > window[1] || p.value <= kAmplitudeFloor) continue;
        x.push_back(std::log(p.t));
        y.push_back(std::log(p.value));
    }
    if (x.size() < 3) throw TooFewPeaks("fewer than three peaks in the power-law window");
    const LineFit f = least_squares(x, y);
    return {FitKind::Power, f.slope, f.std_error, f.intercept, window, f.r2, static_cast<int>(x.size())};
}

FitReport fit_exponential(const std::vector<double>& times, const std::vector<double>& magnitudes,
                          std::array<double, 2> window, const ExponentialFitOptions& options) {
    check_series(times, magnitudes);
    check_window(window);
    std::vector<double> x, y;
    auto add = [&](double t, double m) {
        if (m <= kAmplitudeFloor) return;
        if (options.prefactor_exponent != 0.0 && t <= 0) return;
        x.push_back(t);
        y.push_back(std::log(m) - (options.prefactor_exponent != 0.0 ? options.prefactor_exponent * std::log(t) : 0.0));
    };
    if (options.envelope) {
        PeakOptions po;
        po.t_lo = window[0];
        po.t_hi = window[1];
        po.spacing_hint = options.spacing_hint;
        for (const Peak& p : envelope_peaks(times, magnitudes, po)) add(p.t, p.value);
        if (x.size() < 3) throw TooFewPeaks("fewer than three usable envelope peaks");
    } else {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] >= window[0] && times[i] <= window[1]) add(times[i], magnitudes[i]);
        if (static_cast<int>(x.size()) < kMinFitPoints)
            throw WindowTooNarrow("only " + std::to_string(x.size()) + " usable points in the exponential window");
    }
    const LineFit f = least_squares(x, y);
    return {FitKind::Exponential, f.slope, f.std_error, f.intercept, window, f.r2, static_cast<int>(x.size())};
}

FitReport fit_exponential(const GreensSeries& series, std::array<double, 2> window,
                          const ExponentialFitOptions& options) {
    return fit_exponential(series.times, series.magnitudes(), window, options);
}

PeriodReport period_from_peaks(std::vector<Peak> peaks, double v_theory, int cells) {
    if (peaks.size() < 3) throw TooFewPeaks("need at least three peaks for a period");
    if (v_theory == 0.0) throw ZeroVelocity("theoretical velocity is zero");
    PeriodReport r;
    std::vector<double> gaps;
    for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i].t - peaks[i - 1].t);
    const auto m = static_cast<double>(gaps.size());
    r.T = std::accumulate(gaps.begin(), gaps.end(), 0.0) / m;
    double var = 0;
    for (double g : gaps) var += (g - r.T) * (g - r.T);
    r.T_std = gaps.size() > 1 ? std::sqrt(var / (m - 1)) : 0.0;
    r.T_theory = cells / std::abs(v_theory);
    r.deviation = std::abs(r.T - r.T_theory) / r.T_theory;
    r.peaks = std::move(peaks);
    return r;
}

PeriodReport detect_period(const GreensSeries& series, double v_theory, int cells, PeakOptions options) {
    if (v_theory == 0.0) throw ZeroVelocity("theoretical velocity is zero");
    if (!options.spacing_hint) options.spacing_hint = cells / std::abs(v_theory);
    return period_from_peaks(envelope_peaks(series, options), v_theory, cells);
}

} // namespace nhlat
