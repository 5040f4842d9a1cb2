#include "liesde/superpose.hpp"

#include <cmath>
#include <stdexcept>

namespace liesde {

SuperpositionRule linear_rule(std::size_t n) {
  SuperpositionRule rule;
  rule.kind = RuleKind::LinearCombination;
  rule.state_dim = n;
  rule.inputs = n + 1;
  rule.map = [n](const Eigen::VectorXd& z,
                 const std::vector<Eigen::VectorXd>& sols) {
    Eigen::VectorXd out = sols[n];
    for (std::size_t j = 0; j < n; ++j) {
      out += z[static_cast<Eigen::Index>(j)] * sols[j];
    }
    return out;
  };
  return rule;
}

SuperpositionRule affine1_translation_rule() {
  SuperpositionRule rule;
  rule.kind = RuleKind::GroupTranslation;
  rule.state_dim = 2;
  rule.inputs = 1;
  // (h0, h1) * (z0, z1) = (h0 + h1 z0, h1 z1): the group product in the
  // (translation, scale) coordinates.
  rule.map = [](const Eigen::VectorXd& z,
                const std::vector<Eigen::VectorXd>& sols) {
    const Eigen::VectorXd& h = sols[0];
    Eigen::VectorXd out(2);
    out[0] = h[0] + h[1] * z[0];
    out[1] = h[1] * z[1];
    return out;
  };
  return rule;
}

SuperpositionRule pos_diag_translation_rule(std::size_t n) {
  SuperpositionRule rule;
  rule.kind = RuleKind::GroupTranslation;
  rule.state_dim = n;
  rule.inputs = 1;
  rule.map = [](const Eigen::VectorXd& z,
                const std::vector<Eigen::VectorXd>& sols) {
    return Eigen::VectorXd(sols[0].cwiseProduct(z));
  };
  return rule;
}

SuperpositionRule custom_rule(
    std::size_t state_dim, std::size_t inputs,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                  const std::vector<Eigen::VectorXd>&)> map) {
  SuperpositionRule rule;
  rule.kind = RuleKind::Custom;
  rule.state_dim = state_dim;
  rule.inputs = inputs;
  rule.map = std::move(map);
  return rule;
}

StratonovichSystem linear_homogeneous_part(const StratonovichSystem& sys) {
  sys.validate();
  StratonovichSystem out = sys;
  for (std::size_t i = 0; i < sys.fields.size(); ++i) {
    const int deg = sys.fields[i].max_total_degree();
    if (deg > 1) {
      throw std::invalid_argument(
          "linear_homogeneous_part: field of degree > 1");
    }
    if (deg <= 0) {
      // Constant (or zero) field: inhomogeneity, dropped.
      for (std::size_t j = 0; j < sys.noise_dim; ++j) {
        out.coeff[i][j] = Polynomial::constant(sys.noise_dim, 0.0);
      }
    } else {
      // Mixed constant + linear parts in one field would make the split
      // ambiguous; require purely linear terms.
      for (const auto& t : sys.fields[i].terms()) {
        int s = 0;
        for (int e : t.exponents) s += e;
        if (s == 0) {
          throw std::invalid_argument(
              "linear_homogeneous_part: field mixes constant and linear terms");
        }
      }
    }
  }
  return out;
}

RuleVerification verify_rule(const StratonovichSystem& sys,
                             const SuperpositionRule& rule,
                             const std::vector<Eigen::VectorXd>& particular_starts,
                             const std::vector<Eigen::VectorXd>& z_list,
                             const DrivingPath& path, double tol) {
  sys.validate();
  if (!rule.map) throw std::invalid_argument("verify_rule: rule has no map");
  if (rule.state_dim != sys.state_dim) {
    throw std::invalid_argument("verify_rule: rule dimension != system");
  }
  if (particular_starts.size() != rule.inputs) {
    throw std::invalid_argument(
        "verify_rule: wrong number of particular starts");
  }
  if (z_list.empty()) {
    throw std::invalid_argument("verify_rule: no test initial conditions");
  }
  for (std::size_t a = 0; a < particular_starts.size(); ++a) {
    for (std::size_t b = a + 1; b < particular_starts.size(); ++b) {
      if ((particular_starts[a] - particular_starts[b])
              .lpNorm<Eigen::Infinity>() <= 1e-12) {
        throw std::invalid_argument(
            "verify_rule: particular starts must be distinct");
      }
    }
  }

  // Particular solutions.  The linear-combination rule expects homogeneous
  // solutions in the first n slots and one full solution in the last.
  std::vector<Trajectory> particulars;
  particulars.reserve(rule.inputs);
  if (rule.kind == RuleKind::LinearCombination) {
    const StratonovichSystem hom = linear_homogeneous_part(sys);
    for (std::size_t a = 0; a + 1 < rule.inputs; ++a) {
      particulars.push_back(integrate_heun(hom, path, particular_starts[a]));
    }
    particulars.push_back(
        integrate_heun(sys, path, particular_starts.back()));
  } else {
    for (const auto& q0 : particular_starts) {
      particulars.push_back(integrate_heun(sys, path, q0));
    }
  }

  RuleVerification verification;
  std::vector<Eigen::VectorXd> sols(rule.inputs);
  for (const auto& z : z_list) {
    const Trajectory direct = integrate_heun(sys, path, z);
    double dev = 0.0;
    for (std::size_t k = 0; k < direct.states.size(); ++k) {
      for (std::size_t a = 0; a < rule.inputs; ++a) {
        sols[a] = particulars[a].states[k];
      }
      const Eigen::VectorXd rebuilt = rule.map(z, sols);
      dev = std::max(
          dev, (rebuilt - direct.states[k]).lpNorm<Eigen::Infinity>());
    }
    verification.deviation_per_initial.push_back(dev);
    verification.max_deviation = std::max(verification.max_deviation, dev);
  }
  verification.pass = verification.max_deviation <= tol;
  return verification;
}

TangencyReport tangency_check(const StratonovichSystem& sys,
                              const SuperpositionRule& rule,
                              const std::vector<TangencySample>& samples,
                              const Eigen::VectorXd& noise_point,
                              double fd_step) {
  sys.validate();
  if (!rule.map) throw std::invalid_argument("tangency_check: rule has no map");
  if (static_cast<std::size_t>(noise_point.size()) != sys.noise_dim) {
    throw std::invalid_argument("tangency_check: noise point dimension");
  }
  const std::size_t n = sys.state_dim;
  const std::size_t m = rule.inputs;
  const Eigen::MatrixXd b = sys.coeff_at(noise_point);

  auto field_value = [&](std::size_t j, const Eigen::VectorXd& q) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < sys.fields.size(); ++i) {
      const double w = b(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(j));
      if (w != 0.0) s += w * sys.fields[i](q);
    }
    return s;
  };

  TangencyReport report;
  for (const auto& sample : samples) {
    if (sample.points.size() != m + 1) {
      throw std::invalid_argument("tangency_check: sample needs m+1 points");
    }
    std::vector<Eigen::VectorXd> q(sample.points.begin() + 1,
                                   sample.points.end());
    for (std::size_t j = 0; j < sys.noise_dim; ++j) {
      Eigen::VectorXd residual = field_value(j, sample.points[0]);
      for (std::size_t a = 0; a < m; ++a) {
        const Eigen::VectorXd sja = field_value(j, q[a]);
        // Chain rule through the rule's a-th argument, gradient by central
        // differences: sum_i dPhi/dq_a^i * S_j^i(x, q_a).
        for (std::size_t i = 0; i < n; ++i) {
          const double si = sja[static_cast<Eigen::Index>(i)];
          if (si == 0.0) continue;
          std::vector<Eigen::VectorXd> qp = q;
          std::vector<Eigen::VectorXd> qm = q;
          qp[a][static_cast<Eigen::Index>(i)] += fd_step;
          qm[a][static_cast<Eigen::Index>(i)] -= fd_step;
          const Eigen::VectorXd grad =
              (rule.map(sample.z, qp) - rule.map(sample.z, qm)) /
              (2.0 * fd_step);
          residual -= si * grad;
        }
      }
      report.max_residual = std::max(report.max_residual,
                                     residual.lpNorm<Eigen::Infinity>());
    }
  }
  return report;
}

void write_rule_csv(
    std::ostream& os,
    const std::vector<std::tuple<std::size_t, std::uint64_t, double, bool>>&
        rows) {
  os << "z_index,seed,max_dev,pass\n";
  for (const auto& [z_index, seed, max_dev, pass] : rows) {
    os << z_index << ',' << seed << ',' << format_double(max_dev) << ','
       << (pass ? 1 : 0) << '\n';
  }
}

}  // namespace liesde
