#include <cstdio>
#include <vector>

void kernel_16(double *a, double *b, double *c, std::vector<double> &v, int n, int m)
{
    int i, j;
    double s = 0.0, t = 0.0, mx = 0.0, off = 1.0, last = 0.0;

    #pragma omp parallel for firstprivate(off) lastprivate(last)
    for (int i = 0; i < n; i++) { /* pos-032 */
        last = a[i] + off;
        b[i] = last;
    }

    while (n > 0) {
        n--;
    }

    #pragma omp target teams distribute parallel for map(to: b[0:n]) map(from: a[0:n])
    for (int i = 0; i < n; i++) { /* pos-033 */
        a[i] = b[i] * b[i];
    }

    #pragma omp parallel
    #pragma omp for
    for (int i = 0; i < n; i++) { /* pos-034 */
        c[i] = a[i] - b[i];
    }

    for (auto &x : v) { /* neg-031 */
        x *= 2.0;
    }
    c[0] = s + t + mx + last;
}
