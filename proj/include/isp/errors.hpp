#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace isp {

/// Base for every library failure. `name()` is the stable identifier written
/// to run reports; `context()` carries the grid point or parameter involved.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what, std::map<std::string, double> context = {})
        : std::runtime_error(what), name_(std::move(name)), context_(std::move(context)) {}

    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, double>& context() const noexcept { return context_; }

    /// Input errors map to CLI exit code 2, numerical failures to 1.
    virtual bool is_input_error() const noexcept { return false; }

private:
    std::string name_;
    std::map<std::string, double> context_;
};

#define ISP_DEFINE_ERROR(Type, input_flag)                                                  \
    class Type : public Error {                                                             \
    public:                                                                                 \
        explicit Type(const std::string& what, std::map<std::string, double> context = {}) \
            : Error(#Type, what, std::move(context)) {}                                     \
        bool is_input_error() const noexcept override { return input_flag; }                \
    }

ISP_DEFINE_ERROR(NonConvergence, false);
ISP_DEFINE_ERROR(SingularH, true);
ISP_DEFINE_ERROR(SingularFactor, false);
ISP_DEFINE_ERROR(SingularP, false);
ISP_DEFINE_ERROR(EdgeDecayViolation, false);
ISP_DEFINE_ERROR(SingularScattering, false);
ISP_DEFINE_ERROR(FredholmSingular, false);
ISP_DEFINE_ERROR(DegenerateBoundaryPair, false);
ISP_DEFINE_ERROR(InconsistentInputs, false);
ISP_DEFINE_ERROR(GridMismatch, true);
ISP_DEFINE_ERROR(InvalidArgument, true);
ISP_DEFINE_ERROR(ParseError, true);
ISP_DEFINE_ERROR(ValidationError, true);
ISP_DEFINE_ERROR(IoError, true);

#undef ISP_DEFINE_ERROR

/// Per-s linear system of the coefficient recovery lost rank. Expected outcome
/// for a single boundary matrix or a degenerate boundary pair.
class RankDeficient : public Error {
public:
    RankDeficient(std::size_t deficiency, std::size_t deficient_points, std::size_t total_points)
        : Error("RankDeficient",
                "coefficient system rank-deficient by " + std::to_string(deficiency) + " at " +
                    std::to_string(deficient_points) + "/" + std::to_string(total_points) + " s-points",
                {{"deficiency", double(deficiency)},
                 {"deficient_points", double(deficient_points)},
                 {"total_points", double(total_points)}}),
          deficiency_(deficiency),
          deficient_points_(deficient_points),
          total_points_(total_points) {}

    std::size_t deficiency() const noexcept { return deficiency_; }
    std::size_t deficient_points() const noexcept { return deficient_points_; }
    std::size_t total_points() const noexcept { return total_points_; }

private:
    std::size_t deficiency_;
    std::size_t deficient_points_;
    std::size_t total_points_;
};

}  // namespace isp
