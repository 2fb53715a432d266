#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace rantl {

/// Report inputs absent from the output directory; what() lists them.
class MissingCsvError : public std::runtime_error {
 public:
  MissingCsvError(std::vector<std::string> missing, const std::string& what)
      : std::runtime_error(what), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

// Read from the directory by report().
inline const std::vector<std::string> kReportInputs{
    "ccdf.csv", "convergence.csv", "sweep_urllc_load.csv", "sweep_mec_capacity.csv"};
// Written next to them.
inline const std::vector<std::string> kReportOutputs{
    "ccdf.svg", "sweep_urllc_load.svg", "sweep_mec_capacity.svg", "convergence.svg"};

/// Render the four SVG plots from the CSVs in `dir`. Returns their paths.
std::vector<std::filesystem::path> report(const std::filesystem::path& dir);

}  // namespace rantl
