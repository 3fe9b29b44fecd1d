#include "symext/json_io.hpp"

#include <fstream>

namespace symext::io {

namespace {

json matrix_parts(const Matc& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json re_row = json::array(), im_row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re_row.push_back(m(r, c).real());
      im_row.push_back(m(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

Matc matrix_from_parts(const json& j) {
  const auto& re = j.at("re");
  const Eigen::Index rows = re.size();
  const Eigen::Index cols = rows ? re[0].size() : 0;
  Matc m(rows, cols);
  const bool has_im = j.contains("im");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = cxd(re[r][c].get<double>(), has_im ? j["im"][r][c].get<double>() : 0.0);
  return m;
}

}  // namespace

json to_json(const DensityMatrix& rho) {
  json j = matrix_parts(rho.entries());
  j["type"] = "density_matrix";
  j["dims"] = rho.dims();
  return j;
}

DensityMatrix density_from_json(const json& j) {
  const std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  Matc m = matrix_from_parts(j);
  const double tr = j.contains("trace") ? j["trace"].get<double>() : m.trace().real();
  return DensityMatrix(dims, std::move(m), tr);
}

json to_json(const bell::BellDiagonalDistribution& s) {
  std::vector<double> w(s.weights.data(), s.weights.data() + s.weights.size());
  return json{{"type", "bell_diagonal"}, {"pairs", s.pairs}, {"weights", w}, {"total", s.total}};
}

bell::BellDiagonalDistribution bell_from_json(const json& j) {
  const int pairs = j.at("pairs").get<int>();
  const std::vector<double> w = j.at("weights").get<std::vector<double>>();
  Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  return bell::BellDiagonalDistribution(pairs, std::move(weights));
}

json to_json(const QuantumChannel& channel) {
  json kraus = json::array();
  for (const Matc& k : channel.kraus_ops) kraus.push_back(matrix_parts(k));
  return json{{"type", "channel"},
              {"input_dim", channel.input_dim},
              {"output_dim", channel.output_dim},
              {"kraus", std::move(kraus)}};
}

QuantumChannel channel_from_json(const json& j) {
  std::vector<Matc> kraus;
  for (const auto& k : j.at("kraus")) kraus.push_back(matrix_from_parts(k));
  return QuantumChannel(std::move(kraus));
}

json to_json(const analytic::Decision& d) {
  return json{{"verdict", analytic::verdict_name(d.verdict)}, {"margin", d.margin},
              {"rule", d.rule}};
}

json to_json(const witnesses::WitnessBlock& block) {
  const char* variant = block.variant == witnesses::WitnessVariant::M4_DIAG ? "m4_diag"
                        : block.variant == witnesses::WitnessVariant::M4_EQUAL_ANGLE
                            ? "m4_equal_angle"
                            : "m5_iterative";
  std::vector<double> entries;
  for (Eigen::Index r = 0; r < block.entries.rows(); ++r)
    for (Eigen::Index c = 0; c < block.entries.cols(); ++c)
      entries.push_back(block.entries(r, c));
  json residuals;
  for (const auto& [k, v] : witnesses::constraint_residuals(block)) residuals[k] = v;
  return json{{"variant", variant},
              {"angles", {{"cos_theta", block.cos_theta},
                          {"cos_phi", block.cos_phi},
                          {"cos_alpha", block.cos_alpha}}},
              {"block", entries},
              {"size", block.entries.rows()},
              {"auxiliary", block.auxiliary},
              {"psd", block.psd},
              {"min_eig", block.min_eig},
              {"iterations", block.iterations},
              {"residual", block.residual},
              {"residuals", std::move(residuals)}};
}

json to_json(const sdp::SdpInequality& problem) {
  json fs = json::array();
  for (const auto& f : problem.F) fs.push_back(matrix_parts(Eigen::MatrixXd(f).cast<cxd>()));
  std::vector<double> c(problem.c.data(), problem.c.data() + problem.c.size());
  return json{{"type", "sdp_inequality"},
              {"c", c},
              {"G", matrix_parts(problem.G.cast<cxd>())},
              {"F", std::move(fs)}};
}

json to_json(const sdp::SdpSolution& solution) {
  std::vector<double> x(solution.x.data(), solution.x.data() + solution.x.size());
  const char* status = solution.status == sdp::SdpStatus::OPTIMAL ? "OPTIMAL"
                       : solution.status == sdp::SdpStatus::MAX_ITER ? "MAX_ITER"
                                                                     : "INFEASIBLE_CERTIFICATE";
  return json{{"x", x},
              {"primal_obj", solution.primal_obj},
              {"dual_obj", solution.dual_obj},
              {"gap", solution.gap},
              {"status", status},
              {"iterations", solution.iterations},
              {"note", solution.note}};
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace symext::io
