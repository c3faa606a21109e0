#include "ofdm/table.hpp"

#include "ofdm/error.hpp"

namespace ofdm {

Table::Table(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Table::Table(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ConfigError("table: value count does not match rows*cols");
  }
}

}  // namespace ofdm
