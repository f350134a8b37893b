#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lab {

enum class ProfileKind { sphere, custom_analytic, sampled };

std::string to_string(ProfileKind k);

struct EquatorData {
    double s0 = 0.0;
    double Rmax = 0.0;
    double R2 = 0.0;  // R''(s0)
    double c0 = 0.0;  // |R''(s0)| / R(s0)^3
};

// Profile R(s) on [0, L] of a surface of revolution ds^2 + R(s)^2 dtheta^2.
class RevolutionProfile {
public:
    using Fn = std::function<double(double)>;

    static RevolutionProfile analytic(double L, Fn R, Fn dR, Fn d2R,
                                      ProfileKind kind = ProfileKind::custom_analytic,
                                      std::string name = "custom");
    // Table (s_i, R_i) with s strictly increasing from 0 to L.
    static RevolutionProfile sampled(std::vector<double> s, std::vector<double> R,
                                     std::string name = "sampled");

    double L() const { return L_; }
    double R(double s) const;
    double dR(double s) const;
    double d2R(double s) const;
    ProfileKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    bool is_sampled() const { return kind_ == ProfileKind::sampled; }
    // Sample spacing for tables, 0 for analytic profiles.
    double table_step() const;

private:
    double L_ = 0.0;
    ProfileKind kind_ = ProfileKind::custom_analytic;
    std::string name_;
    Fn R_, dR_, d2R_;

    struct Table {
        std::vector<double> s, R, dR, d2R;
        double h = 0.0;
        int cell(double x) const;
    };
    std::shared_ptr<const Table> table_;
};

// Presets: "sphere", "scaled-sphere" {a}, "perturbed-sphere" {eps, center, width}.
RevolutionProfile make_profile(const std::string& kind,
                               const std::map<std::string, double>& params = {});

// Loads (s, R) from a CSV with a header line.
RevolutionProfile load_profile_csv(const std::string& path);

struct ValidationCheck {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool pass = false;
};

ValidationReport validate_profile(const RevolutionProfile& p, int grid = 4000);

// Throws std::runtime_error on a non-strict or degenerate maximum.
EquatorData equator_data(const RevolutionProfile& p, int grid = 4000);

} // namespace lab
