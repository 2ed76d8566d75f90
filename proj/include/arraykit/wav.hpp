// Copyright 2026 The arraykit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "arraykit/signal.hpp"

namespace arraykit {

enum class SampleFormat { kPcm16, kPcm24, kFloat32 };

// Reads PCM 16/24/32-bit integer or IEEE float 32/64 RIFF WAVE files,
// including WAVE_FORMAT_EXTENSIBLE. Integer samples map to [-1, 1).
MultiChannelSignal read_wav(const std::string& path);

// Integer formats clip to full scale.
void write_wav(const std::string& path, const MultiChannelSignal& signal, SampleFormat format);
void write_wav(const std::string& path, const MonoSignal& signal, SampleFormat format);

SampleFormat parse_sample_format(const std::string& name);

}  // namespace arraykit
