#include "gts/error.hpp"

// Out-of-line anchor so the error hierarchy's type info lives in one TU.
namespace gts {
}
