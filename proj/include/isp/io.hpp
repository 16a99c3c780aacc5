#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "isp/domain.hpp"
#include "isp/example_e1.hpp"
#include "isp/forward.hpp"
#include "isp/line_function.hpp"
#include "isp/rh.hpp"

namespace isp {

using Json = nlohmann::json;

std::string sha256_hex(std::string_view data);

/// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Sorted keys, two-space indent, doubles as %.17g, non-finite numbers as null.
std::string dump_json(const Json& j);

/// %.17g
std::string format_double(double v);

Json to_json(cplx z);
cplx complex_from_json(const Json& j, const std::string& field);
Json to_json(const Mat& m);
Mat matrix_from_json(const Json& j, const std::string& field);

// Problem descriptions. Parsing failures raise ParseError naming the field.
Dispersion dispersion_from_json(const Json& j);
ScalarProfile profile_from_json(const Json& j, const std::string& field);
Json to_json(const ScalarProfile& p);
MCanonicalPotential potential_from_json(const Json& j);
Json to_json(const MCanonicalPotential& pot);
RationalMatrix rational_from_json(const Json& j);
E1System e1_system_from_json(const Json& j);

Json to_json(const std::vector<Violation>& v);

// Bulk arrays.
/// (x, t, block, k, j, re, im) over the snapshot, structurally allowed entries only.
std::string kernels_csv(const TOKernels& k);
/// (lambda, block, k, j, re, im) for several named functions on one grid.
std::string line_functions_csv(const std::vector<std::pair<std::string, const LineMatrixFunction*>>& fs);
/// Grid metadata, analyticity tags and extra fields for the line CSV.
Json line_functions_sidecar(const std::vector<std::pair<std::string, const LineMatrixFunction*>>& fs);
/// Reads a block back from a line CSV plus its sidecar.
LineMatrixFunction read_line_function(const std::filesystem::path& csv, const std::filesystem::path& sidecar,
                                      const std::string& block);
/// (s, k, which_family, re, im).
std::string e1_profiles_csv(const std::vector<std::pair<std::string, const E1Profiles*>>& sets);
std::string e1_recovery_csv(const E1Recovery& rec, double dx, double x_max);

LambdaGrid grid_from_json(const Json& j);
Json to_json(const LambdaGrid& g);

/// Output directory with a manifest of everything written through it.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    void write(const std::string& name, std::string_view content);
    /// [{file, bytes, sha256}] sorted by file name.
    Json manifest() const;

private:
    std::filesystem::path dir_;
    std::vector<std::tuple<std::string, std::size_t, std::string>> files_;
};

}  // namespace isp
