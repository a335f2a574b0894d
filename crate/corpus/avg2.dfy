method avg2(a: int, b: int) returns (r: int)
  ensures 2 * r <= a + b
  ensures a + b < 2 * r + 2
{
  r := (a + b) / 2;
}
