#ifndef DWCONV_MEASURE_SPEC_HPP
#define DWCONV_MEASURE_SPEC_HPP

#include <iosfwd>
#include <string>

#include "measures.hpp"

namespace dw {

/// Text format for measures, versioned header line "measure-spec v1".
///
///   measure-spec v1
///   support real-line | circle | positive-line
///   total-mass <float>
///   atom <loc> <mass>            # loc: float, "inf" (real line), or re,im (circle)
///   density-grid <v1> <v2> ...
///   density-values <v1> <v2> ...
///
/// Writing is canonical (atoms sorted, floats at full precision), so
/// write(read(f)) = f holds bit-exactly for canonical files.
MeasureRep read_measure_spec(std::istream& in);
MeasureRep read_measure_spec_file(const std::string& path);
void write_measure_spec(std::ostream& out, const MeasureRep& m);
void write_measure_spec_file(const std::string& path, const MeasureRep& m);

/// Full-precision float formatting shared by the spec and CSV writers.
std::string format_double(double v);

} // namespace dw

#endif
