import mpmath as m
m.mp.dps = 50
pi = m.pi
def Psi(p): return m.cos(2*pi*(p*p - p - m.mpf(1)/16))/m.cos(2*pi*p)
def C(k, p):
    d = lambda j: m.diff(Psi, p, j)
    if k==0: return Psi(p)
    if k==1: return -d(3)/(2**5*3*pi**2)
    if k==2: return d(6)/(2**11*3**2*pi**4) + d(2)/(2**6*pi**2)
    if k==3: return -d(9)/(2**16*3**4*pi**6) - d(5)/(2**8*3*5*pi**4) - d(1)/(2**6*pi**2)
    if k==4: return d(12)/(2**23*3**5*pi**8) + 11*d(8)/(2**17*3**2*5*pi**6) + 19*d(4)/(2**13*3*pi**4) + Psi(p)/(2**7*pi**2)
M = 60
nodes = [m.cos(pi*(j+m.mpf(1)/2)/M) for j in range(M)]  # z in [-1,1], p=(z+1)/2
out = []
for k in range(5):
    vals = [C(k, (z+1)/2) for z in nodes]
    coefs = []
    for i in range(M):
        c = 2*sum(vals[j]*m.cos(pi*i*(j+m.mpf(1)/2)/M) for j in range(M))/M
        coefs.append(c)
    coefs[0] /= 2
    last = max(i for i,c in enumerate(coefs) if abs(c) > 1e-18)
    out.append([float(c) for c in coefs[:last+1]])
    print(k, last, float(abs(coefs[-1])))
with open('rs_coefficients.inc','w') as f:
    f.write('// Chebyshev coefficients of the Riemann-Siegel correction terms C0..C4 on\n// p in [0,1], variable z = 2p - 1. Generated by tools/gen_rs_coefficients.py.\n')
    for k,cs in enumerate(out):
        f.write('constexpr double kC%dCoeffs[] = {\n' % k)
        for c in cs: f.write('    %.17e,\n' % c)
        f.write('};\n')
