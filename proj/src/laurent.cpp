// laurent.cpp: Laurent polynomial arithmetic

#include "nhlat/laurent.hpp"

#include <algorithm>
#include <cmath>

namespace nhlat {

LaurentPoly::LaurentPoly(int min_power, std::vector<cplx> coeffs)
    : min_power_(min_power), coeffs_(std::move(coeffs)) {
    normalize();
}

void LaurentPoly::normalize() {
    while (!coeffs_.empty() && coeffs_.back() == cplx{}) coeffs_.pop_back();
    std::size_t lead = 0;
    while (lead < coeffs_.size() && coeffs_[lead] == cplx{}) ++lead;
    if (lead > 0) {
        coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
        min_power_ += static_cast<int>(lead);
    }
    if (coeffs_.empty()) min_power_ = 0;
}

cplx LaurentPoly::coeff(int power) const {
    const int i = power - min_power_;
    if (i < 0 || i >= static_cast<int>(coeffs_.size())) return {};
    return coeffs_[static_cast<std::size_t>(i)];
}

cplx LaurentPoly::operator()(cplx beta) const {
    if (coeffs_.empty()) return {};
    cplx acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * beta + *it;
    return acc * std::pow(beta, min_power_);
}

LaurentPoly LaurentPoly::derivative() const {
    std::vector<cplx> d(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        d[i] = coeffs_[i] * static_cast<double>(min_power_ + static_cast<int>(i));
    return LaurentPoly(min_power_ - 1, std::move(d));
}

LaurentPoly LaurentPoly::trimmed(double rel_tol) const {
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    std::vector<cplx> c = coeffs_;
    for (auto& x : c)
        if (std::abs(x) <= rel_tol * scale) x = {};
    return LaurentPoly(min_power_, std::move(c));
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = o;
    const int lo = std::min(min_power_, o.min_power_);
    const int hi = std::max(max_power(), o.max_power());
    std::vector<cplx> c(static_cast<std::size_t>(hi - lo + 1));
    for (int p = lo; p <= hi; ++p) c[static_cast<std::size_t>(p - lo)] = coeff(p) + o.coeff(p);
    min_power_ = lo;
    coeffs_ = std::move(c);
    normalize();
    return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) { return *this += o * cplx{-1.0, 0.0}; }

LaurentPoly& LaurentPoly::operator*=(cplx s) {
    for (auto& c : coeffs_) c *= s;
    normalize();
    return *this;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> c(a.coeffs().size() + b.coeffs().size() - 1);
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        for (std::size_t j = 0; j < b.coeffs().size(); ++j) c[i + j] += a.coeffs()[i] * b.coeffs()[j];
    return LaurentPoly(a.min_power() + b.min_power(), std::move(c));
}

} // namespace nhlat
