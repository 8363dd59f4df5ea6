#pragma once

#include <string>

#include <json.hpp>

#include "tensorreg/datagen.hpp"
#include "tensorreg/experiment.hpp"
#include "tensorreg/packing.hpp"
#include "tensorreg/solver.hpp"
#include "tensorreg/var.hpp"

// JSON forms used by config files and reports. Readers reject unknown keys
// and wrong types with ConfigError.
namespace tensorreg {

ojson shape_json(const Shape& s);
Shape shape_from_json(const ojson& j);
// "5x5x5" or "5,5,5".
Shape parse_shape(const std::string& text);

ojson matrix_json(const Eigen::MatrixXd& m);  // list of rows
Eigen::MatrixXd matrix_from_json(const ojson& j);
ojson tensor_json(const DenseTensor& t);      // {shape, data}
DenseTensor tensor_from_json(const ojson& j);

// {"kind": "FiberGroup", "mode": 1} / {"kind": "SliceFrob", "axes": [0, 1]}
ojson to_json(const RegularizerSpec& r);
RegularizerSpec regularizer_from_json(const ojson& j);
// "EntryL1", "FiberGroup:1", "SliceFrob:0:1", ...
RegularizerSpec parse_regularizer(const std::string& text);
std::string regularizer_text(const RegularizerSpec& r);

// {"class": "Theta1", "param": 5, "shape": [8, 8, 8], "magnitude": 1, "axis": 2}
ojson to_json(const ModelClassSpec& m);
ModelClassSpec model_spec_from_json(const ojson& j);

// {"type": "SupportEntries", "cells": [[i, j, k], ...]} and similar for the
// other variants; projector factors are matrices, roles "A" or "B".
ojson to_json(const SubspaceSpec& s);
SubspaceSpec subspace_from_json(const ojson& j);

ojson to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const ojson& j);

ojson to_json(const WidthEstimate& w);
// The estimate itself is written separately (TNS1) by callers that need it.
ojson to_json(const SolveResult& r);

// {"coefficients": [A_1, ..., A_p], "auto_stabilize": false, "burn_in": 530}
ojson to_json(const VarModel& m);
VarModel var_model_from_json(const ojson& j);
ojson to_json(const SpectralExtrema& e);

ojson to_json(const PackingSet& p, bool with_elements);
ojson to_json(const PackingVerification& v);
ojson to_json(const FanoReport& f);

ojson to_json(const RateExperimentConfig& c);
RateExperimentConfig rate_config_from_json(const ojson& j);
ojson to_json(const WidthExperimentConfig& c);
WidthExperimentConfig width_config_from_json(const ojson& j);
ojson to_json(const ComparisonConfig& c);
ComparisonConfig comparison_config_from_json(const ojson& j);

ojson read_json_file(const std::string& path);

}  // namespace tensorreg
