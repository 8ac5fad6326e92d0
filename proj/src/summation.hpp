#ifndef QEDFLOW_SRC_SUMMATION_HPP
#define QEDFLOW_SRC_SUMMATION_HPP

#include <cmath>

namespace qedflow::detail {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace qedflow::detail

#endif  // QEDFLOW_SRC_SUMMATION_HPP
