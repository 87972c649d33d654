#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "isopara/fields.hpp"

namespace isopara {

/// Lattice description carried in the JSON header line of a grid CSV file.
struct GridHeader {
    std::vector<int> shape;
    std::vector<double> spacing;
    std::vector<double> origin;

    int n() const { return static_cast<int>(shape.size()); }
    long count() const;
};

/// Scalar samples on a regular lattice, interpolated by tensor-product cubic
/// B-splines (C^2) so finite-difference jets can be taken anywhere inside.
///
/// File layout: line 1 is a JSON object {"shape":[...],"spacing":[...],
/// "origin":[...]}, an optional column-name line follows, then one CSV row
/// x_1,...,x_n,u per lattice node in any order.
class GridField {
public:
    GridField(GridHeader header, std::vector<double> values);

    static GridField read_csv(std::istream& in);
    static GridField read_csv_file(const std::string& path);
    static GridField sample(const GridHeader& header, const Blackbox& u);
    void write_csv(std::ostream& out) const;

    const GridHeader& header() const { return header_; }
    int n() const { return header_.n(); }

    /// Interpolated value; NaN outside the lattice box.
    double value(const Vector& x) const;
    Blackbox as_blackbox() const;

private:
    long flat(const std::vector<int>& idx) const;

    GridHeader header_;
    std::vector<double> values_;
    std::vector<double> coeffs_;
    std::vector<long> strides_;
};

}  // namespace isopara
