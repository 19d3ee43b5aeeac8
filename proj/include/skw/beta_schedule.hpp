#pragma once

#include <cmath>
#include <string>

#include "skw/errors.hpp"

namespace skw {

// Mixing weights for the coupling mixture: beta_k = 2^-k, so the partial sums
// beta*_k = 1 - 2^-k are exact in double precision and climb to one.
class BetaSchedule {
public:
    static BetaSchedule geometric() { return BetaSchedule("geometric"); }

    static BetaSchedule from_rule(const std::string& rule) {
        if (rule != "geometric")
            throw DomainError("unknown beta rule: " + rule);
        return geometric();
    }

    double beta(int k) const {
        if (k < 1) throw DomainError("beta index must be >= 1");
        return std::ldexp(1.0, -k);
    }

    // beta_1 + ... + beta_k; beta_star(0) == 0.
    double beta_star(int k) const {
        if (k < 0) throw DomainError("beta_star index must be >= 0");
        return 1.0 - std::ldexp(1.0, -k);
    }

    const std::string& rule() const { return rule_; }

private:
    explicit BetaSchedule(std::string rule) : rule_(std::move(rule)) {}
    std::string rule_;
};

} // namespace skw
