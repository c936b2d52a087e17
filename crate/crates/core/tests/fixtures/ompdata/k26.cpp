#include <cstdio>
#include <vector>

void kernel_26(double *a, double *b, double *c, std::vector<double> &v, int n, int m)
{
    int i, j;
    double s = 0.0, t = 0.0, mx = 0.0, off = 1.0, last = 0.0;

    for (int k = 0; k < n; k++) { /* neg-050 */
        a[k] = a[k - 1] + b[k];
    }

    #pragma omp parallel for
    for (int i = 0; i < n; i++) { /* pos-053 */
        a[i] = b[i] + 1.0;
    }

    #pragma omp simd
    for (int i = 0; i < n; i++) { /* uns-018 */
        a[i] += 1.0;
    }

    #pragma omp parallel for reduction(+:s)
    for (int i = 0; i < n; i++) { /* pos-054 */
        s += a[i];
    }

    #pragma omp parallel for private(s) reduction(+:s)
    for (int i = 0; i < n; i++) { /* uns-019 */
        s += a[i];
    }

    for (auto &x : v) { /* neg-051 */
        x *= 2.0;
    }
    c[0] = s + t + mx + last;
}
