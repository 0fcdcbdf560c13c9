#pragma once

#include <string>
#include <vector>

#include "accsim/errors.hpp"
#include "accsim/params.hpp"

namespace accsim {

enum class ControllerKind { Idm, Gipps, Linear };
enum class SpacingPolicy { Inherent, Cth, IdmDesired, GippsEquilibrium };
enum class DelayKind { None, Constant };
enum class DynamicsKind { None, Linear, Nonlinear };
enum class ConstraintKind { None, Constant, Mfc };

inline constexpr int kModelCount = 90;

// One of the 90 model variants: a base controller plus perception-delay,
// vehicle-dynamics, and acceleration-constraint extensions.
struct ModelSpec {
  int id = 0;
  ControllerKind controller = ControllerKind::Idm;
  SpacingPolicy spacing = SpacingPolicy::IdmDesired;
  DelayKind delay = DelayKind::None;
  DynamicsKind dynamics = DynamicsKind::None;
  ConstraintKind constraints = ConstraintKind::None;

  // Model IDs come in five blocks of 18, one per base controller class.
  // Within a block: delay-major, then dynamics, then constraints.
  static ModelSpec from_id(int id) {
    if (id < 1 || id > kModelCount)
      throw ConfigError("model id " + std::to_string(id) +
                        " outside 1.." + std::to_string(kModelCount));
    ModelSpec spec;
    spec.id = id;
    const int block = (id - 1) / 18;  // 0=IDM 1=Gipps 2=L-CTH 3=L-IDM 4=L-Gipps
    const int offset = (id - 1) % 18;
    switch (block) {
      case 0:
        spec.controller = ControllerKind::Idm;
        spec.spacing = SpacingPolicy::IdmDesired;
        break;
      case 1:
        spec.controller = ControllerKind::Gipps;
        spec.spacing = SpacingPolicy::Inherent;
        break;
      case 2:
        spec.controller = ControllerKind::Linear;
        spec.spacing = SpacingPolicy::Cth;
        break;
      case 3:
        spec.controller = ControllerKind::Linear;
        spec.spacing = SpacingPolicy::IdmDesired;
        break;
      default:
        spec.controller = ControllerKind::Linear;
        spec.spacing = SpacingPolicy::GippsEquilibrium;
        break;
    }
    spec.delay = offset < 9 ? DelayKind::None : DelayKind::Constant;
    switch ((offset % 9) / 3) {
      case 0: spec.dynamics = DynamicsKind::None; break;
      case 1: spec.dynamics = DynamicsKind::Linear; break;
      default: spec.dynamics = DynamicsKind::Nonlinear; break;
    }
    switch (offset % 3) {
      case 0: spec.constraints = ConstraintKind::None; break;
      case 1: spec.constraints = ConstraintKind::Constant; break;
      default: spec.constraints = ConstraintKind::Mfc; break;
    }
    return spec;
  }

  bool is_base() const {
    return delay == DelayKind::None && dynamics == DynamicsKind::None &&
           constraints == ConstraintKind::None;
  }

  // Calibration parameter names in table order: the base controller's list,
  // then tau_p, tau_a, and the road-load set as the extensions require.
  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    switch (controller) {
      case ControllerKind::Idm:
        names = {"delta", "v0", "d0", "t_h", "a_max", "a_min"};
        break;
      case ControllerKind::Gipps:
        names = {"theta", "v0", "d0", "t_h", "a_max", "a_min", "a_min_hat"};
        break;
      case ControllerKind::Linear:
        names = {"k_s", "k_v", "k_0", "v0", "d0", "t_h"};
        if (spacing == SpacingPolicy::IdmDesired) {
          names.push_back("a_max");
          names.push_back("a_min");
        } else if (spacing == SpacingPolicy::GippsEquilibrium) {
          names.push_back("theta");
          names.push_back("a_min");
          names.push_back("a_min_hat");
        }
        break;
    }
    if (delay == DelayKind::Constant) names.push_back("tau_p");
    if (dynamics != DynamicsKind::None) names.push_back("tau_a");
    if (dynamics == DynamicsKind::Nonlinear) {
      names.push_back("m_load");
      names.push_back("f_0");
      names.push_back("f_1");
      names.push_back("f_2");
    }
    return names;
  }

  std::string class_name() const {
    switch (controller) {
      case ControllerKind::Idm: return "IDM";
      case ControllerKind::Gipps: return "Gipps";
      case ControllerKind::Linear:
        switch (spacing) {
          case SpacingPolicy::Cth: return "L-CTH";
          case SpacingPolicy::IdmDesired: return "L-IDM";
          default: return "L-Gipps";
        }
    }
    return "?";
  }

  // Base variant (no extensions) of this model's class: IDs 1/19/37/55/73.
  int base_id() const { return ((id - 1) / 18) * 18 + 1; }

  // Extension-group label used by the report tables.
  std::string extension_group() const {
    const bool pd = delay == DelayKind::Constant;
    switch (dynamics) {
      case DynamicsKind::None: return pd ? "PD" : "Base";
      case DynamicsKind::Linear: return pd ? "PD+LVD" : "LVD";
      default: return pd ? "PD+NLVD" : "NLVD";
    }
  }

  void validate_params(const ParameterSet& params) const {
    for (const auto& name : parameter_names())
      if (!params.has(name))
        throw ConfigError("model " + std::to_string(id) +
                          ": missing parameter '" + name + "'");
  }
};

inline std::vector<ModelSpec> enumerate_models() {
  std::vector<ModelSpec> specs;
  specs.reserve(kModelCount);
  for (int id = 1; id <= kModelCount; ++id) specs.push_back(ModelSpec::from_id(id));
  return specs;
}

inline std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Idm: return "IDM";
    case ControllerKind::Gipps: return "Gipps";
    case ControllerKind::Linear: return "Linear";
  }
  return "?";
}

inline std::string to_string(SpacingPolicy policy) {
  switch (policy) {
    case SpacingPolicy::Inherent: return "inherent";
    case SpacingPolicy::Cth: return "CTH";
    case SpacingPolicy::IdmDesired: return "IDM-desired";
    case SpacingPolicy::GippsEquilibrium: return "Gipps-equilibrium";
  }
  return "?";
}

inline std::string to_string(DelayKind kind) {
  return kind == DelayKind::None ? "None" : "Constant";
}

inline std::string to_string(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::None: return "None";
    case DynamicsKind::Linear: return "Linear";
    case DynamicsKind::Nonlinear: return "Nonlinear";
  }
  return "?";
}

inline std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::None: return "None";
    case ConstraintKind::Constant: return "Constant";
    case ConstraintKind::Mfc: return "MFC";
  }
  return "?";
}

}  // namespace accsim
