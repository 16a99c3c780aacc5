#include "isp/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "isp/errors.hpp"

namespace isp {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

void atomic_write(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void dump_into(const Json& j, std::string& out, int depth) {
    const std::string pad(std::size_t(2 * (depth + 1)), ' ');
    const std::string close(std::size_t(2 * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: already sorted
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                dump_into(it.value(), out, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // short numeric arrays (complex pairs, small vectors) stay on one line
            const bool flat = j.size() <= 8 && std::all_of(j.begin(), j.end(), [](const Json& e) {
                                  return e.is_number() || e.is_null() || e.is_boolean();
                              });
            if (flat) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    dump_into(j[i], out, depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump_into(j[i], out, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

[[noreturn]] void parse_fail(const std::string& field, const std::string& why) {
    throw ParseError(field + ": " + why);
}

double number_at(const Json& j, const std::string& field) {
    if (!j.is_number()) parse_fail(field, "expected a number");
    return j.get<double>();
}

}  // namespace

std::string dump_json(const Json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += "\n";
    return out;
}

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

cplx complex_from_json(const Json& j, const std::string& field) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        parse_fail(field, "expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Json to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

Mat matrix_from_json(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) parse_fail(field, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) parse_fail(field, "expected rows as arrays");
    const std::size_t cols = j[0].size();
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) parse_fail(field, "ragged matrix");
        for (std::size_t c = 0; c < cols; ++c)
            m(Eigen::Index(r), Eigen::Index(c)) =
                complex_from_json(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

Dispersion dispersion_from_json(const Json& j) {
    if (!j.is_array()) parse_fail("dispersion", "expected an array of speeds");
    std::vector<double> xi;
    for (std::size_t i = 0; i < j.size(); ++i) xi.push_back(number_at(j[i], "dispersion[" + std::to_string(i) + "]"));
    return Dispersion(std::move(xi));
}

ScalarProfile profile_from_json(const Json& j, const std::string& field) {
    auto exp_terms = [&](const Json& arr) {
        if (!arr.is_array()) parse_fail(field, "expected a list of {gamma, a}");
        std::vector<ExpTerm> terms;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const Json& t = arr[i];
            const std::string f = field + "[" + std::to_string(i) + "]";
            if (!t.is_object() || !t.contains("gamma") || !t.contains("a")) parse_fail(f, "expected {gamma, a}");
            const double a = number_at(t["a"], f + ".a");
            if (!(a > 0.0)) throw ValidationError(f + ".a must be positive");
            terms.push_back({complex_from_json(t["gamma"], f + ".gamma"), a});
        }
        return ScalarProfile::exp_sum(std::move(terms));
    };
    if (j.is_array()) return exp_terms(j);
    if (!j.is_object()) parse_fail(field, "expected an exponential sum or a sampled profile");
    if (j.contains("exp_sum")) return exp_terms(j["exp_sum"]);
    if (j.contains("sampled")) {
        const Json& s = j["sampled"];
        if (!s.is_object() || !s.contains("dx") || !s.contains("values") || !s.contains("tail_rate"))
            parse_fail(field, "sampled profile needs dx, values, tail_rate");
        std::vector<cplx> v;
        for (std::size_t i = 0; i < s["values"].size(); ++i)
            v.push_back(complex_from_json(s["values"][i], field + ".values[" + std::to_string(i) + "]"));
        return ScalarProfile::sampled(number_at(s["dx"], field + ".dx"), std::move(v),
                                      number_at(s["tail_rate"], field + ".tail_rate"));
    }
    parse_fail(field, "expected exp_sum or sampled");
}

Json to_json(const ScalarProfile& p) {
    if (p.is_exp_sum()) {
        Json terms = Json::array();
        for (const auto& t : p.terms()) terms.push_back({{"gamma", to_json(t.gamma)}, {"a", t.rate}});
        return {{"exp_sum", terms}};
    }
    const auto& s = p.samples();
    Json v = Json::array();
    for (cplx z : s.values) v.push_back(to_json(z));
    return {{"sampled", {{"dx", s.dx}, {"tail_rate", s.tail_rate}, {"values", v}}}};
}

MCanonicalPotential potential_from_json(const Json& j) {
    if (!j.is_object()) parse_fail("potential", "expected an object");
    if (!j.contains("n") || !j["n"].is_number_integer()) parse_fail("potential.n", "expected an integer");
    const int n = j["n"].get<int>();
    if (n < 1) throw ValidationError("potential.n must be at least 1");
    MCanonicalPotential pot(n);
    if (j.contains("entries")) {
        const Json& es = j["entries"];
        if (!es.is_array()) parse_fail("potential.entries", "expected an array");
        for (std::size_t i = 0; i < es.size(); ++i) {
            const Json& e = es[i];
            const std::string f = "potential.entries[" + std::to_string(i) + "]";
            if (!e.is_object() || !e.contains("block") || !e.contains("k") || !e.contains("j"))
                parse_fail(f, "expected {block, k, j, ...}");
            if (!e["block"].is_string()) parse_fail(f + ".block", "expected a string");
            const auto b = parse_block(e["block"].get<std::string>());
            if (!b) parse_fail(f + ".block", "unknown block " + e["block"].get<std::string>());
            if (!e["k"].is_number_integer() || !e["j"].is_number_integer()) parse_fail(f, "k, j must be integers");
            const int k = e["k"].get<int>(), jj = e["j"].get<int>();
            if (k < 1 || k > n || jj < 1 || jj > n) throw ValidationError(f + ": index out of range 1..n");
            pot.set_entry(*b, k - 1, jj - 1, profile_from_json(e, f));
        }
    }
    if (j.contains("envelope")) {
        const Json& e = j["envelope"];
        if (!e.is_object() || !e.contains("C") || !e.contains("eps")) parse_fail("potential.envelope", "expected {C, eps}");
        pot.set_envelope({number_at(e["C"], "potential.envelope.C"), number_at(e["eps"], "potential.envelope.eps")});
    }
    return pot;
}

Json to_json(const MCanonicalPotential& pot) {
    const int n = pot.n();
    Json entries = Json::array();
    for (Block b : kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const ScalarProfile& p = pot.entry(b, k, j);
                if (p.is_zero()) continue;
                Json e = to_json(p);
                e["block"] = potential_block_name(b);
                e["k"] = k + 1;
                e["j"] = j + 1;
                entries.push_back(e);
            }
    Json out{{"n", n}, {"entries", entries}};
    if (pot.has_declared_envelope()) {
        const Envelope env = pot.envelope();
        out["envelope"] = {{"C", env.C}, {"eps", env.eps}};
    }
    return out;
}

RationalMatrix rational_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("m") || !j["m"].is_number_integer()) parse_fail("rational.m", "expected an integer");
    const int m = j["m"].get<int>();
    if (m < 1) throw ValidationError("rational.m must be at least 1");
    RationalMatrix r(m);
    if (!j.contains("poles") || !j["poles"].is_array()) parse_fail("rational.poles", "expected an array");
    for (std::size_t i = 0; i < j["poles"].size(); ++i) {
        const Json& p = j["poles"][i];
        const std::string f = "rational.poles[" + std::to_string(i) + "]";
        if (!p.is_object() || !p.contains("pole") || !p.contains("residue")) parse_fail(f, "expected {pole, residue}");
        Mat res = matrix_from_json(p["residue"], f + ".residue");
        if (res.rows() != m || res.cols() != m) throw ValidationError(f + ".residue must be m x m");
        const cplx z = complex_from_json(p["pole"], f + ".pole");
        if (z.imag() == 0.0) throw ValidationError(f + ".pole must be off the real axis");
        r.add_pole(std::move(res), z);
    }
    return r;
}

E1System e1_system_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("dispersion")) parse_fail("e1", "expected {dispersion, c_first, c_last}");
    Dispersion disp = dispersion_from_json(j["dispersion"]);
    const int n = disp.n();
    auto family = [&](const char* key) {
        std::vector<ScalarProfile> out(std::size_t(std::max(2 * n - 2, 0)), ScalarProfile::exp_sum({}));
        if (!j.contains(key)) return out;
        const Json& f = j[key];
        if (!f.is_object()) parse_fail(std::string("e1.") + key, "expected an object keyed by k");
        for (auto it = f.begin(); it != f.end(); ++it) {
            int k = 0;
            try {
                std::size_t used = 0;
                k = std::stoi(it.key(), &used);
                if (used != it.key().size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                parse_fail(std::string("e1.") + key, "key '" + it.key() + "' is not an integer");
            }
            if (k < 2 || k > 2 * n - 1) throw ValidationError(std::string("e1.") + key + ": k must lie in 2..2n-1");
            out[std::size_t(k - 2)] = profile_from_json(it.value(), std::string("e1.") + key + "." + it.key());
        }
        return out;
    };
    auto first = family("c_first");
    auto last = family("c_last");
    return E1System(std::move(disp), std::move(first), std::move(last));
}

Json to_json(const std::vector<Violation>& v) {
    Json out = Json::array();
    for (const auto& e : v) {
        Json item{{"rule", e.rule}, {"message", e.message}};
        if (e.k > 0) {
            item["block"] = potential_block_name(e.block);
            item["k"] = e.k;
            item["j"] = e.j;
        }
        if (std::isfinite(e.x)) item["x"] = e.x;
        out.push_back(item);
    }
    return out;
}

namespace {

void csv_number(std::string& out, double v) { out += format_double(v); }

}  // namespace

std::string kernels_csv(const TOKernels& k) {
    const int n = k.n();
    const double d = k.step() * double(k.snapshot_stride());
    std::string out = "x,t,block,k,j,re,im\n";
    for (std::size_t row = 0; row < k.snapshot_rows(); ++row)
        for (std::size_t col = 0; col < k.snapshot_cols(); ++col) {
            const double x = double(row) * d;
            const double t = x + double(col) * d;
            for (Block b : kAllBlocks)
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) {
                        if (!kernel_entry_allowed(b, n, r, c)) continue;
                        const cplx v =
                            k.snapshot(row, col, block_row_offset(b, n) + r, block_col_offset(b, n) + c);
                        csv_number(out, x);
                        out += ',';
                        csv_number(out, t);
                        out += ',' + kernel_block_name(b) + ',' + std::to_string(r + 1) + ',' +
                               std::to_string(c + 1) + ',';
                        csv_number(out, v.real());
                        out += ',';
                        csv_number(out, v.imag());
                        out += '\n';
                    }
        }
    return out;
}

std::string line_functions_csv(const std::vector<std::pair<std::string, const LineMatrixFunction*>>& fs) {
    if (fs.empty()) return "lambda,block,k,j,re,im\n";
    {
        std::vector<const LineMatrixFunction*> ptrs;
        for (const auto& [name, f] : fs) ptrs.push_back(f);
        // blocks may differ in size; the sidecar records each m
        for (std::size_t i = 1; i < ptrs.size(); ++i)
            if (!(ptrs[i]->grid() == ptrs[0]->grid())) throw GridMismatch("functions are sampled on different grids");
    }
    const LambdaGrid& g = fs.front().second->grid();
    std::string out = "lambda,block,k,j,re,im\n";
    for (std::size_t i = 0; i < g.size(); ++i)
        for (const auto& [name, f] : fs) {
            const Mat& v = (*f)[i];
            for (int r = 0; r < f->m(); ++r)
                for (int c = 0; c < f->m(); ++c) {
                    csv_number(out, g[i]);
                    out += ',' + name + ',' + std::to_string(r + 1) + ',' + std::to_string(c + 1) + ',';
                    csv_number(out, v(r, c).real());
                    out += ',';
                    csv_number(out, v(r, c).imag());
                    out += '\n';
                }
        }
    return out;
}

Json to_json(const LambdaGrid& g) {
    Json out{{"kind", grid_kind_name(g.kind())}, {"size", g.size()}, {"lambda_max", g.lambda_max()}};
    if (g.kind() == GridKind::Cayley) out["cayley_scale"] = g.cayley_scale();
    if (g.kind() == GridKind::Custom) out["points"] = std::vector<double>(g.points().begin(), g.points().end());
    return out;
}

LambdaGrid grid_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) parse_fail("grid.kind", "expected a string");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "custom") {
        if (!j.contains("points") || !j["points"].is_array()) parse_fail("grid.points", "expected an array");
        std::vector<double> pts;
        for (const auto& p : j["points"]) pts.push_back(number_at(p, "grid.points"));
        return LambdaGrid::custom(std::move(pts));
    }
    if (!j.contains("size") || !j["size"].is_number_integer()) parse_fail("grid.size", "expected an integer");
    const double lm = number_at(j.value("lambda_max", Json()), "grid.lambda_max");
    const auto n = j["size"].get<std::size_t>();
    if (kind == "cayley") return LambdaGrid::cayley(lm, n);
    if (kind == "uniform") return LambdaGrid::uniform(lm, n);
    parse_fail("grid.kind", "unknown grid kind " + kind);
}

Json line_functions_sidecar(const std::vector<std::pair<std::string, const LineMatrixFunction*>>& fs) {
    Json funcs = Json::object();
    for (const auto& [name, f] : fs)
        funcs[name] = {{"m", f->m()},
                       {"analyticity", half_plane_name(f->analyticity().kind)},
                       {"strip", f->analyticity().delta}};
    Json out{{"functions", funcs}};
    if (!fs.empty()) out["grid"] = to_json(fs.front().second->grid());
    return out;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

LineMatrixFunction read_line_function(const fs::path& csv, const fs::path& sidecar, const std::string& block) {
    Json side;
    try {
        side = Json::parse(read_file(sidecar));
    } catch (const Json::parse_error& e) {
        throw ParseError(sidecar.string() + ": " + e.what());
    }
    if (!side.contains("grid")) parse_fail("sidecar.grid", "missing");
    LambdaGrid grid = grid_from_json(side["grid"]);
    if (!side.contains("functions") || !side["functions"].contains(block))
        parse_fail("sidecar.functions", "no function named " + block);
    const Json& meta = side["functions"][block];
    const int m = meta.value("m", 0);
    if (m < 1) parse_fail("sidecar.functions." + block + ".m", "expected a positive integer");
    Analyticity tag;
    const std::string hp = meta.value("analyticity", std::string("none"));
    tag.kind = hp == "plus" ? HalfPlane::Plus : hp == "minus" ? HalfPlane::Minus : hp == "strip" ? HalfPlane::Strip
                                                                                                 : HalfPlane::None;
    tag.delta = meta.value("strip", 0.0);

    LineMatrixFunction f(grid, m, tag);
    std::vector<char> seen(grid.size() * std::size_t(m * m), 0);
    std::istringstream in(read_file(csv));
    std::string line;
    std::getline(in, line);
    if (line.rfind("lambda,block,k,j,re,im", 0) != 0) parse_fail(csv.string(), "unexpected header");
    std::size_t lineno = 1, i = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6) parse_fail(csv.string() + ":" + std::to_string(lineno), "expected 6 columns");
        if (cells[1] != block) continue;
        double lam = 0, re = 0, im = 0;
        int k = 0, j = 0;
        try {
            lam = std::stod(cells[0]);
            k = std::stoi(cells[2]);
            j = std::stoi(cells[3]);
            re = std::stod(cells[4]);
            im = std::stod(cells[5]);
        } catch (const std::exception&) {
            parse_fail(csv.string() + ":" + std::to_string(lineno), "malformed number");
        }
        if (k < 1 || k > m || j < 1 || j > m) parse_fail(csv.string() + ":" + std::to_string(lineno), "index out of range");
        // rows arrive in grid order; locate lambda by advancing
        while (i < grid.size() && grid[i] < lam && std::abs(grid[i] - lam) > 1e-12 * std::max(1.0, std::abs(lam))) ++i;
        if (i >= grid.size() || std::abs(grid[i] - lam) > 1e-12 * std::max(1.0, std::abs(lam)))
            throw GridMismatch("lambda " + format_double(lam) + " is not a grid node", {{"lambda", lam}});
        f[i](k - 1, j - 1) = {re, im};
        seen[(i * std::size_t(m) + std::size_t(k - 1)) * std::size_t(m) + std::size_t(j - 1)] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        parse_fail(csv.string(), "function " + block + " does not cover the grid");
    return f;
}

std::string e1_profiles_csv(const std::vector<std::pair<std::string, const E1Profiles*>>& sets) {
    std::string out = "s,k,which_family,re,im\n";
    for (const auto& [label, p] : sets) {
        const std::string pre = label.empty() ? "" : label + ":";
        for (std::size_t k = 0; k < p->c_minus.size(); ++k)
            for (int fam = 0; fam < 2; ++fam) {
                const auto& v = fam == 0 ? p->c_minus[k] : p->c_plus[k];
                const std::string name = pre + (fam == 0 ? "minus" : "plus");
                for (std::size_t i = 0; i < p->s.size(); ++i) {
                    csv_number(out, p->s[i]);
                    out += ',' + std::to_string(k + 1) + ',' + name + ',';
                    csv_number(out, v[i].real());
                    out += ',';
                    csv_number(out, v[i].imag());
                    out += '\n';
                }
            }
    }
    return out;
}

std::string e1_recovery_csv(const E1Recovery& rec, double dx, double x_max) {
    std::string out = "s,k,which_family,re,im\n";
    const auto count = std::size_t(std::floor(x_max / dx + 1e-9)) + 1;
    for (int fam = 0; fam < 2; ++fam) {
        const auto& ps = fam == 0 ? rec.c_first : rec.c_last;
        const std::string name = fam == 0 ? "c_first" : "c_last";
        for (std::size_t k = 0; k < ps.size(); ++k)
            for (std::size_t i = 0; i < count; ++i) {
                const double x = double(i) * dx;
                const cplx v = ps[k](x);
                csv_number(out, x);
                out += ',' + std::to_string(k + 2) + ',' + name + ',';
                csv_number(out, v.real());
                out += ',';
                csv_number(out, v.imag());
                out += '\n';
            }
    }
    return out;
}

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

void ArtifactWriter::write(const std::string& name, std::string_view content) {
    atomic_write(dir_ / name, content);
    files_.erase(std::remove_if(files_.begin(), files_.end(), [&](const auto& f) { return std::get<0>(f) == name; }),
                 files_.end());
    files_.emplace_back(name, content.size(), sha256_hex(content));
}

Json ArtifactWriter::manifest() const {
    auto sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    Json out = Json::array();
    for (const auto& [name, bytes, hash] : sorted) out.push_back({{"file", name}, {"bytes", bytes}, {"sha256", hash}});
    return out;
}

}  // namespace isp
