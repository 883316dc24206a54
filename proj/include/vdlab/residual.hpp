#pragma once

namespace vdlab {

// Max-norm of a residual field together with the max-norm of its largest
// term, so identities can be judged in relative terms.
struct Residual {
    double abs = 0.0;
    double scale = 0.0;

    double relative() const { return scale > 0.0 ? abs / scale : abs; }
};

}  // namespace vdlab
