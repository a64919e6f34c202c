#include "ood/rng.hpp"

#include <cmath>
#include <numbers>

namespace ood {

double Rng::normal() noexcept {
    if (m_has_spare_) {
        m_has_spare_ = false;
        return m_spare_;
    }
    const double u1 = uniform_open_left();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    m_spare_ = radius * std::sin(angle);
    m_has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace ood
