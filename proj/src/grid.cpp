#include "isopara/grid.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "isopara/error.hpp"

namespace isopara {

namespace {

const double kPole = std::sqrt(3.0) - 2.0;

double causal_init(const std::vector<double>& c) {
    const long n = static_cast<long>(c.size());
    const long horizon = static_cast<long>(std::ceil(std::log(1e-17) / std::log(std::abs(kPole))));
    if (horizon < n) {
        double zn = kPole;
        double sum = c[0];
        for (long k = 1; k < horizon; ++k) {
            sum += zn * c[k];
            zn *= kPole;
        }
        return sum;
    }
    double zn = kPole;
    const double iz = 1.0 / kPole;
    double z2n = std::pow(kPole, static_cast<double>(n - 1));
    double sum = c[0] + z2n * c[n - 1];
    z2n *= z2n * iz;
    for (long k = 1; k <= n - 2; ++k) {
        sum += (zn + z2n) * c[k];
        zn *= kPole;
        z2n *= iz;
    }
    return sum / (1.0 - zn * zn);
}

// In-place mirror-boundary cubic B-spline prefilter of one line.
void prefilter_line(std::vector<double>& c) {
    const long n = static_cast<long>(c.size());
    if (n == 1) return;
    const double gain = (1.0 - kPole) * (1.0 - 1.0 / kPole);
    for (double& v : c) v *= gain;
    c[0] = causal_init(c);
    for (long k = 1; k < n; ++k) c[k] += kPole * c[k - 1];
    c[n - 1] = (kPole / (kPole * kPole - 1.0)) * (kPole * c[n - 2] + c[n - 1]);
    for (long k = n - 2; k >= 0; --k) c[k] = kPole * (c[k + 1] - c[k]);
}

int mirror(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

void bspline_weights(double t, double w[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double omt = 1.0 - t;
    w[0] = omt * omt * omt / 6.0;
    w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    w[3] = t3 / 6.0;
}

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "non-numeric grid cell '" + cell + "'");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

long GridHeader::count() const {
    long c = 1;
    for (int s : shape) c *= s;
    return c;
}

GridField::GridField(GridHeader header, std::vector<double> values)
    : header_(std::move(header)), values_(std::move(values)) {
    const int n = header_.n();
    if (n < 1 || static_cast<int>(header_.spacing.size()) != n || static_cast<int>(header_.origin.size()) != n)
        throw Error(ErrorCode::ParseError, "grid header needs shape, spacing and origin of equal length");
    for (int d = 0; d < n; ++d) {
        if (header_.shape[d] < 1) throw Error(ErrorCode::ParseError, "grid shape entries must be positive");
        if (!(header_.spacing[d] > 0.0)) throw Error(ErrorCode::ParseError, "grid spacing must be positive");
    }
    if (static_cast<long>(values_.size()) != header_.count())
        throw Error(ErrorCode::ParseError, "grid value count does not match its shape");

    strides_.assign(n, 1);
    for (int d = n - 2; d >= 0; --d) strides_[d] = strides_[d + 1] * header_.shape[d + 1];

    coeffs_ = values_;
    for (int d = 0; d < n; ++d) {
        const int len = header_.shape[d];
        std::vector<double> line(len);
        const long total = header_.count();
        for (long base = 0; base < total; ++base) {
            if ((base / strides_[d]) % len != 0) continue;  // only line starts along axis d
            for (int i = 0; i < len; ++i) line[i] = coeffs_[base + i * strides_[d]];
            prefilter_line(line);
            for (int i = 0; i < len; ++i) coeffs_[base + i * strides_[d]] = line[i];
        }
    }
}

long GridField::flat(const std::vector<int>& idx) const {
    long f = 0;
    for (int d = 0; d < n(); ++d) f += idx[d] * strides_[d];
    return f;
}

GridField GridField::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty grid file");
    GridHeader h;
    try {
        const auto j = nlohmann::json::parse(line);
        h.shape = j.at("shape").get<std::vector<int>>();
        h.spacing = j.at("spacing").get<std::vector<double>>();
        if (j.contains("origin")) {
            h.origin = j.at("origin").get<std::vector<double>>();
        } else {
            h.origin.assign(h.shape.size(), 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad grid header: ") + e.what());
    }
    const int n = h.n();
    if (n < 1 || h.spacing.size() != h.shape.size() || h.origin.size() != h.shape.size())
        throw Error(ErrorCode::ParseError, "grid header needs shape, spacing and origin of equal length");
    for (int s : h.shape)
        if (s < 1) throw Error(ErrorCode::ParseError, "grid shape entries must be positive");

    std::vector<double> values(h.count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<char> seen(values.size(), 0);
    bool first = true;
    std::vector<int> idx(n);
    long rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (first) {
            first = false;
            const char c = line.find_first_not_of(" \t") == std::string::npos ? ' ' : line[line.find_first_not_of(" \t")];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '"') continue;  // column names
        }
        const std::vector<double> row = parse_row(line);
        if (static_cast<int>(row.size()) != n + 1)
            throw Error(ErrorCode::ParseError, "grid rows need n + 1 columns");
        for (int d = 0; d < n; ++d) {
            const double pos = (row[d] - h.origin[d]) / h.spacing[d];
            const double r = std::round(pos);
            if (std::abs(pos - r) > 1e-6 || r < 0 || r >= h.shape[d])
                throw Error(ErrorCode::ParseError, "grid row is not on the declared lattice");
            idx[d] = static_cast<int>(r);
        }
        long f = 0;
        long stride = 1;
        for (int d = n - 1; d >= 0; --d) {
            f += idx[d] * stride;
            stride *= h.shape[d];
        }
        values[f] = row[n];
        if (!seen[f]) ++rows;
        seen[f] = 1;
    }
    if (rows != h.count()) throw Error(ErrorCode::ParseError, "grid is missing lattice nodes");
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, "grid values must be finite");
    return GridField(std::move(h), std::move(values));
}

GridField GridField::read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open grid file " + path);
    return read_csv(in);
}

GridField GridField::sample(const GridHeader& header, const Blackbox& u) {
    const int n = header.n();
    std::vector<double> values(header.count());
    std::vector<int> idx(n, 0);
    Vector x(n);
    for (long f = 0; f < header.count(); ++f) {
        long rem = f;
        for (int d = n - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(rem % header.shape[d]);
            rem /= header.shape[d];
        }
        for (int d = 0; d < n; ++d) x(d) = header.origin[d] + idx[d] * header.spacing[d];
        values[f] = u(x);
    }
    return GridField(header, std::move(values));
}

void GridField::write_csv(std::ostream& out) const {
    nlohmann::json j;
    j["shape"] = header_.shape;
    j["spacing"] = header_.spacing;
    j["origin"] = header_.origin;
    out << j.dump() << '\n';
    const int dims = n();
    for (int d = 0; d < dims; ++d) out << 'x' << (d + 1) << ',';
    out << "u\n";
    out << std::setprecision(17);
    std::vector<int> idx(dims);
    for (long f = 0; f < header_.count(); ++f) {
        long rem = f;
        for (int d = dims - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(rem % header_.shape[d]);
            rem /= header_.shape[d];
        }
        for (int d = 0; d < dims; ++d) out << header_.origin[d] + idx[d] * header_.spacing[d] << ',';
        out << values_[f] << '\n';
    }
}

double GridField::value(const Vector& x) const {
    const int dims = n();
    if (x.size() != dims) throw Error(ErrorCode::InvalidArgument, "point has the wrong dimension");
    std::vector<int> base(dims);
    std::vector<std::array<double, 4>> w(dims);
    for (int d = 0; d < dims; ++d) {
        const double pos = (x(d) - header_.origin[d]) / header_.spacing[d];
        if (!(pos >= 0.0 && pos <= header_.shape[d] - 1)) return std::numeric_limits<double>::quiet_NaN();
        const int i = std::min(static_cast<int>(std::floor(pos)), std::max(0, header_.shape[d] - 2));
        base[d] = i;
        double tmp[4];
        bspline_weights(pos - i, tmp);
        for (int k = 0; k < 4; ++k) w[d][k] = tmp[k];
    }
    double sum = 0.0;
    std::vector<int> idx(dims);
    const long corners = 1L << (2 * dims);
    for (long c = 0; c < corners; ++c) {
        double weight = 1.0;
        long rem = c;
        for (int d = 0; d < dims; ++d) {
            const int k = static_cast<int>(rem & 3);
            rem >>= 2;
            weight *= w[d][k];
            idx[d] = mirror(base[d] - 1 + k, header_.shape[d]);
        }
        sum += weight * coeffs_[flat(idx)];
    }
    return sum;
}

Blackbox GridField::as_blackbox() const {
    auto self = std::make_shared<const GridField>(*this);
    return [self](const Vector& x) { return self->value(x); };
}

}  // namespace isopara
