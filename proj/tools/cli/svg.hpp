// Copyright 2026 The ITCG Authors
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

#ifndef ITCG_CLI_SVG_HPP
#define ITCG_CLI_SVG_HPP

#include <string>
#include <vector>

namespace itcg::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool equal_aspect = false;  // same scale on both axes (trajectory plots)
};

/// Self-contained SVG line plot with axes, ticks and a legend. The output
/// depends only on the data (no timestamps).
std::string render_svg(const Plot& p, int width = 640, int height = 480);

}  // namespace itcg::cli

#endif  // ITCG_CLI_SVG_HPP
