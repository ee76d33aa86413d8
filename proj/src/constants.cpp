#include "reductionlab/constants.hpp"

#include <cmath>
#include <string>

#include "reductionlab/errors.hpp"

namespace reductionlab {

void PhysicalConstants::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"G", G},
      {"hbar", hbar},
      {"k_boltzmann", k_boltzmann},
      {"c_light", c_light},
      {"xi", xi},
      {"electron_mass", electron_mass},
      {"elementary_charge", elementary_charge},
      {"vacuum_permittivity", vacuum_permittivity},
  };
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw InvalidInput(std::string("physical constant '") + name + "' must be finite and > 0");
    }
  }
}

}  // namespace reductionlab
