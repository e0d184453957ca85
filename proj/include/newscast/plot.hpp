#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace newscast {

struct PlotSeries {
    std::string label;
    std::vector<double> values;
    std::string color;
};

/// Static SVG line chart; x is the sample index. No timestamps are embedded,
/// so identical inputs give byte-identical files.
std::string render_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<PlotSeries>& series, const std::string& x_first = {},
                              const std::string& x_last = {});

/// Renders a history CSV (epoch,train_loss,val_loss) as a loss curve, or a
/// forecast/prediction CSV (with predicted_close and actual_close columns) as
/// a predicted-vs-actual overlay. Writes `<stem>.svg` into `out_dir` and
/// returns its path.
std::filesystem::path plot_csv(const std::filesystem::path& input, const std::filesystem::path& out_dir);

}  // namespace newscast
