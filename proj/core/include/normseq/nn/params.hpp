#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace normseq::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Flat view over one named parameter block and its gradient accumulator.
// Models expose their state as a stable, ordered list of these; optimizers,
// the gradient checker and the serializer all work through this view.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
};

inline ParamRef param_ref(std::string name, Mat& value, Mat& grad) {
  return {std::move(name), value.data(), grad.data(), value.rows(), value.cols()};
}
inline ParamRef param_ref(std::string name, Vec& value, Vec& grad) {
  return {std::move(name), value.data(), grad.data(), value.rows(), 1};
}

// Flat binary container: magic + version, then a shape table naming every
// block, then the payloads as row-major little-endian doubles.
void write_param_blocks(std::ostream& out, const std::vector<ParamRef>& blocks);

// Reads into already-shaped blocks; names and shapes must match the stream.
void read_param_blocks(std::istream& in, const std::vector<ParamRef>& blocks);

}  // namespace normseq::nn
