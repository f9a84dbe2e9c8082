#pragma once

// Versioned text checkpoint. Whitespace-separated tokens; reals are written
// with 17 significant digits so a load reproduces every bit.
//
//   cidal-checkpoint 1
//   time_step <t>
//   model <encoder layers> <classifier layers>
//   layer <out> <in> <activation>     (one per layer, encoder first)
//   <out*in weights, row-major> <out biases>
//   gmm <k> <p> <reg_epsilon>          (optional)
//   <k weights> <k*p means> <k*p*p covariances>
//   buffer <n_b> <k> <entries> <d>     (optional)
//   entry <task> <label> <distance> <d inputs>
//   end

#include <iosfwd>
#include <string>

#include "cidal/trainer.hpp"

namespace cidal {

inline constexpr const char* kCheckpointMagic = "cidal-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// The epoch history is not stored.
void write_checkpoint(std::ostream& os, const TrainerState& state);
TrainerState read_checkpoint(std::istream& is);

void save_checkpoint(const std::string& path, const TrainerState& state);
TrainerState load_checkpoint(const std::string& path);

// Model-only files use the same layout without the gmm and buffer sections.
void save_model(const std::string& path, const ModelParams& model);
ModelParams load_model(const std::string& path);

}  // namespace cidal
