#ifndef PUPILBENCH_DETECTORS_HPP
#define PUPILBENCH_DETECTORS_HPP

#include "pupilbench/cht.hpp"
#include "pupilbench/detection.hpp"
#include "pupilbench/ef.hpp"
#include "pupilbench/ido.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/rst.hpp"

#include <exception>

namespace pupil {

struct DetectorConfigs {
    ChtConfig cht;
    EfConfig ef;
    IdoConfig ido;
    RstConfig rst;
};

/// Runs one detector; failures come back as an errored Detection carrying the
/// error code. `elapsed` covers the detector call only.
inline Detection run_detector(Method method, const GrayImage& img, const DetectorConfigs& cfg = {})
{
    const auto call = [&]() -> Detection {
        try {
            switch (method) {
            case Method::CHT: return cht_detect(img, cfg.cht);
            case Method::EF: return ef_detect(img, cfg.ef);
            case Method::IDO: return ido_detect(img, cfg.ido);
            case Method::RST: return rst_detect(img, cfg.rst);
            }
        } catch (const DetectionError& e) {
            return Detection::failed(method, e.code());
        } catch (const ImageTooSmall&) {
            return Detection::failed(method, "ImageTooSmall");
        }
        return Detection::failed(method, "UnknownMethod");
    };
    auto [det, elapsed] = timed(call);
    det.elapsed = elapsed;
    return det;
}

} // namespace pupil

#endif // PUPILBENCH_DETECTORS_HPP
