// analysis.hpp: power-law and exponential fits, envelope peaks and recurrence periods

#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "nhlat/dynamics.hpp"

namespace nhlat {

inline constexpr double kAmplitudeFloor = 1e-14;

enum class FitKind { Power, Exponential };
const char* to_string(FitKind k);

struct FitReport {
    FitKind kind = FitKind::Power;
    double value = 0.0;     // exponent or rate
    double std_error = 0.0;
    double intercept = 0.0; // log amplitude at t = 1 (power) or t = 0 (exponential)
    std::array<double, 2> window{0.0, 0.0};
    double r2 = 0.0;
    int n_points = 0;
};

struct Peak {
    double t;
    double value;
};

struct PeakOptions {
    double t_lo = 0.0;
    double t_hi = std::numeric_limits<double>::infinity();
    std::optional<double> spacing_hint;
    double prominence = 1.2;
};

// Local maxima of |G| that dominate a window of +/- half the current spacing estimate and
// stand out from the neighbouring minima by the prominence factor.
std::vector<Peak> envelope_peaks(const std::vector<double>& times, const std::vector<double>& magnitudes,
                                 const PeakOptions& options = {});
std::vector<Peak> envelope_peaks(const GreensSeries& series, const PeakOptions& options = {});

// Least squares of log|G| against log t over [window[0], window[1]].
FitReport fit_power_law(const std::vector<double>& times, const std::vector<double>& magnitudes,
                        std::array<double, 2> window);
FitReport fit_power_law(const GreensSeries& series, std::array<double, 2> window);
FitReport fit_power_law(const std::vector<Peak>& peaks, std::array<double, 2> window);

struct ExponentialFitOptions {
    bool envelope = true;            // fit only the envelope peaks inside the window
    double prefactor_exponent = 0.0; // fit log|G| - p log t, removing a known t^p prefactor
    std::optional<double> spacing_hint;
};

FitReport fit_exponential(const std::vector<double>& times, const std::vector<double>& magnitudes,
                          std::array<double, 2> window, const ExponentialFitOptions& options = {});
FitReport fit_exponential(const GreensSeries& series, std::array<double, 2> window,
                          const ExponentialFitOptions& options = {});

struct PeriodReport {
    double T = 0.0;
    double T_std = 0.0;
    std::vector<Peak> peaks;
    double T_theory = 0.0;
    double deviation = 0.0; // |T - T_theory| / T_theory
};

PeriodReport detect_period(const GreensSeries& series, double v_theory, int cells, PeakOptions options = {});
PeriodReport period_from_peaks(std::vector<Peak> peaks, double v_theory, int cells);

} // namespace nhlat
