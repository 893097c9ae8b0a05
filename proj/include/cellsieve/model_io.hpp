#pragma once

#include <iosfwd>
#include <string>

#include "cellsieve/learners.hpp"

namespace cellsieve {

// Plain-text model format, version 1:
//
//   cellsieve-model 1
//   kind ridge|svr
//   kernel linear|sigmoid
//   gamma <g>            (sigmoid only)
//   coef0 <c>            (sigmoid only)
//   lambda <l>           (ridge only)
//   y_mean <m>           (ridge only)
//   C <c>                (svr only)
//   epsilon <e>          (svr only)
//   bias <b>             (svr only)
//   q <rows>
//   n <features>
//   column_means <n values>   (ridge only)
//   rows
//   <coefficient> <n feature values>    q lines
//
// Numbers are written with 17 significant digits so reading reproduces the
// doubles exactly.
void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace cellsieve
