#include "chanchart/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace chanchart {

bool Dataset::has_ground_truth() const {
    return !samples.empty() &&
           std::all_of(samples.begin(), samples.end(),
                       [](const CSISample& s) { return s.ground_truth.has_value(); });
}

void Dataset::validate() const {
    if (meta.n_antennas < 1 || meta.n_subcarriers < 1)
        throw ValidationError("dataset meta requires B >= 1 and W >= 1");
    if (meta.cyclic_prefix < 1 || meta.cyclic_prefix > meta.n_subcarriers)
        throw ValidationError("cyclic prefix C must satisfy 1 <= C <= W, got C=" +
                              std::to_string(meta.cyclic_prefix));
    if (meta.array.antenna_count() != int(meta.n_antennas))
        throw ValidationError("array layout rows*cols does not match B");
    if (meta.array.kind == ArrayGeometry::ULA && meta.array.rows != 1)
        throw ValidationError("ULA layout must have rows == 1");

    std::map<std::uint32_t, double> last_time;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const CSISample& s = samples[i];
        if (s.h.rows() != int(meta.n_antennas) || s.h.cols() != int(meta.n_subcarriers))
            throw ValidationError("sample " + std::to_string(i) +
                                  " CSI matrix shape does not match dataset meta");
        if (!s.h.allFinite())
            throw ValidationError("sample " + std::to_string(i) + " has non-finite CSI entries");
        if (!std::isfinite(s.timestamp) || s.timestamp < 0.0)
            throw ValidationError("sample " + std::to_string(i) +
                                  " timestamp must be finite and nonnegative");
        if (s.ground_truth && !s.ground_truth->allFinite())
            throw ValidationError("sample " + std::to_string(i) + " has non-finite ground truth");

        auto it = last_time.find(s.ue_id);
        if (it != last_time.end() && s.timestamp <= it->second)
            throw ValidationError("timestamps for ue " + std::to_string(s.ue_id) +
                                  " are not strictly increasing at sample " + std::to_string(i));
        last_time[s.ue_id] = s.timestamp;
    }
}

double infer_sampling_interval(const Dataset& ds) {
    std::map<std::uint32_t, double> last_time;
    std::vector<double> gaps;
    for (const CSISample& s : ds.samples) {
        auto it = last_time.find(s.ue_id);
        if (it != last_time.end()) gaps.push_back(s.timestamp - it->second);
        last_time[s.ue_id] = s.timestamp;
    }
    if (gaps.empty())
        throw ValidationError("cannot infer sampling interval: no UE has two samples");
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    return gaps[gaps.size() / 2];
}

} // namespace chanchart
