#ifndef PUPILBENCH_PUPILBENCH_HPP
#define PUPILBENCH_PUPILBENCH_HPP

// Everything except the HTTP annotation service, which pulls in httplib.

#include "pupilbench/bench.hpp"
#include "pupilbench/cht.hpp"
#include "pupilbench/codec.hpp"
#include "pupilbench/detection.hpp"
#include "pupilbench/detectors.hpp"
#include "pupilbench/ef.hpp"
#include "pupilbench/ellipse_fit.hpp"
#include "pupilbench/ido.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/imaging.hpp"
#include "pupilbench/manifest.hpp"
#include "pupilbench/metrics.hpp"
#include "pupilbench/overlay.hpp"
#include "pupilbench/report.hpp"
#include "pupilbench/rst.hpp"
#include "pupilbench/synth.hpp"

#endif // PUPILBENCH_PUPILBENCH_HPP
